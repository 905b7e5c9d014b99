"""Entropy catalogue: closed forms, endpoint limits, inverse-map round trips."""

import math

import numpy as np
import pytest

from gibbskit import ExtendedReal, ModelValidationError, make_model, validate_growth

CATALOGUE = [
    ("boltzmann", 1.0, {}),
    ("fermi_dirac", 1.0, {}),
    ("fermi_dirac", 0.5, {}),
    ("bose_einstein", 1.0, {}),
    ("tsallis", 1.0, {"q": 2.0}),
    ("tsallis", 1.0, {"q": 3.0}),
    ("tsallis", 1.0, {"q": 0.5}),
]


def test_density_vanishes_at_zero():
    for name, n_bar, params in CATALOGUE:
        model = make_model(name, n_bar, params)
        assert float(model.entropy_density(np.array([0.0]))[0]) == 0.0


def test_boltzmann_endpoints_and_values():
    model = make_model("boltzmann", 1.0)
    assert model.deriv_limit_zero.kind == "-inf"
    assert model.deriv_limit_cap.is_finite
    assert model.deriv_limit_cap.value == 0.0  # log(1)
    assert model.occupation(0.0) == 1.0
    np.testing.assert_allclose(model.thermal_occupation(2.0, 2.0), math.exp(-1.0), rtol=1e-14)


def test_tsallis_q2_endpoints():
    model = make_model("tsallis", 1.0, {"q": 2.0})
    assert model.deriv_limit_zero.is_finite and model.deriv_limit_zero.value == 0.0
    assert model.deriv_limit_cap.is_finite
    np.testing.assert_allclose(model.deriv_limit_cap.value, 2.0, rtol=1e-14)
    assert model.holder_exponent == 1.0
    # derivative at zero finite: occupation vanishes for nonnegative args
    assert model.thermal_occupation(1.0, 0.0) == 0.0
    assert model.thermal_occupation(1.0, 5.0) == 0.0


def test_fermi_dirac_values():
    model = make_model("fermi_dirac", 1.0)
    assert model.deriv_limit_cap.kind == "+inf"
    np.testing.assert_allclose(model.thermal_occupation(1.0, 0.0), 0.5, rtol=1e-15)
    capped = make_model("fermi_dirac", 0.5)
    assert capped.deriv_limit_cap.is_finite
    assert capped.deriv_limit_cap.value == 0.0  # log(0.5/0.5)


def test_bose_einstein_cap_limit_finite():
    model = make_model("bose_einstein", 1.0)
    assert model.deriv_limit_cap.is_finite
    np.testing.assert_allclose(model.deriv_limit_cap.value, math.log(0.5), rtol=1e-14)
    assert model.deriv_limit_zero.kind == "-inf"


@pytest.mark.parametrize("name,n_bar,params", CATALOGUE)
def test_inverse_map_round_trip(name, n_bar, params):
    model = make_model(name, n_bar, params)
    x = n_bar * np.linspace(0.001, 0.999, 1000)
    back = model.occupation(-np.asarray(model.entropy_deriv(x)))
    np.testing.assert_allclose(back, x, rtol=1e-10)


@pytest.mark.parametrize("name,n_bar,params", CATALOGUE)
def test_occupation_monotone_and_bounded(name, n_bar, params):
    # window where consecutive values stay resolvable at double precision
    model = make_model(name, n_bar, params)
    lo = max(model.domain_lo, -25.0)
    hi = min(model.domain_hi, 25.0)
    t = np.linspace(lo + 1e-9, hi - 1e-9, 800)
    occ = model.occupation(t)
    assert np.all(np.diff(occ) < 0.0)
    assert np.all((occ >= 0.0) & (occ <= n_bar + 1e-15))


@pytest.mark.parametrize("name,n_bar,params", CATALOGUE)
def test_density_strictly_convex(name, n_bar, params):
    model = make_model(name, n_bar, params)
    x = n_bar * np.linspace(0.001, 0.999, 400)
    slopes = np.diff(model.entropy_density(x)) / np.diff(x)
    assert np.all(np.diff(slopes) > 0.0)


def test_endpoint_extension_of_thermal_occupation():
    # finite cap limit: arguments at or below -T*s'(cap) return the cap
    model = make_model("tsallis", 1.0, {"q": 2.0})
    assert model.thermal_occupation(2.0, -2.0 * 2.0) == 1.0
    assert model.thermal_occupation(2.0, -10.0) == 1.0
    # finite zero limit: arguments at or above -T*s'(0) = 0 return zero
    assert model.thermal_occupation(2.0, 0.0) == 0.0
    be = make_model("bose_einstein", 2.0)
    arg = -be.deriv_limit_cap.value * 3.0
    assert be.thermal_occupation(3.0, arg) == 2.0


def test_occupation_increases_with_temperature_at_fixed_argument():
    x = np.array([0.5, 1.0, 3.0, 10.0])
    for name, n_bar, params in CATALOGUE:
        model = make_model(name, n_bar, params)
        low = model.thermal_occupation(1.0, x)
        high = model.thermal_occupation(2.5, x)
        assert np.all(high >= low)


def test_growth_validation_boltzmann():
    model = make_model("boltzmann", 1.0)
    report = validate_growth(model, dimension=1)
    # sup of x^0.1 |log x| on (0, 0.5] is 10/e at x = e^-10
    assert 3.6 <= report.polynomial_sup <= 3.8
    assert report.occupation_bound_ok


def test_growth_validation_tsallis_constants():
    model = make_model("tsallis", 1.0, {"q": 2.0})
    report = validate_growth(model, dimension=1)
    np.testing.assert_allclose(report.holder_lower, 2.0, rtol=1e-9)
    np.testing.assert_allclose(report.holder_upper, 2.0, rtol=1e-9)
    assert report.holder_exponent == 1.0


def test_growth_exponent_out_of_interval_rejected():
    with pytest.raises(ModelValidationError):
        make_model("boltzmann", 1.0, {"gamma": 0.0})
    model = make_model("boltzmann", 1.0, {"gamma": 0.2})  # valid shape...
    with pytest.raises(ModelValidationError):
        validate_growth(model, dimension=1)  # ...but below 1/3 for d=1


def test_divergent_custom_derivative_rejected():
    # convex density with s'(x) = -x^{-0.9}: steeper than any x^{gamma-1}
    # allowed at gamma = 0.5, so the weighted supremum diverges toward 0
    params = {
        "entropy_density": lambda x: -10.0 * np.asarray(x, float) ** 0.1,
        "entropy_deriv": lambda x: -np.asarray(x, float) ** -0.9,
        "gamma": 0.5,
    }
    model = make_model("custom", 1.0, params)
    with pytest.raises(ModelValidationError):
        validate_growth(model, dimension=1)


def test_custom_model_bisection_matches_closed_form():
    from scipy.special import xlogy

    params = {
        "entropy_density": lambda x: xlogy(np.asarray(x, float), np.asarray(x, float))
        - np.asarray(x, float),
        "entropy_deriv": lambda x: np.log(np.asarray(x, float)),
    }
    custom = make_model("custom", 1.0, params)
    reference = make_model("boltzmann", 1.0)
    t = np.linspace(0.3, 8.0, 50)
    np.testing.assert_allclose(custom.occupation(t), reference.occupation(t), atol=1e-10)
    x = np.linspace(0.05, 0.95, 40)
    back = custom.occupation(-np.log(x))
    np.testing.assert_allclose(back, x, atol=1e-10)


def test_constructor_rejections():
    with pytest.raises(ModelValidationError):
        make_model("fermi_dirac", 1.2)
    with pytest.raises(ModelValidationError):
        make_model("tsallis", 1.0, {"q": 1.0})
    with pytest.raises(ModelValidationError):
        make_model("tsallis", 1.0, {"q": -2.0})
    with pytest.raises(ModelValidationError):
        make_model("boltzmann", -1.0)
    with pytest.raises(ModelValidationError):
        make_model("no_such_model", 1.0)
    with pytest.raises(ModelValidationError):
        make_model("tsallis", 1.0)  # q missing


def test_extended_real_tags():
    finite = ExtendedReal.finite(2.5)
    assert finite.is_finite and finite.to_float() == 2.5
    assert not ExtendedReal.pos_inf().is_finite
    assert ExtendedReal.pos_inf().to_float() == math.inf
    assert ExtendedReal.neg_inf().to_float() == -math.inf
