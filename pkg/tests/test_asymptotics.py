"""Semiclassical constants, phase-space volumes, scans and the scaling fit."""

import math

import numpy as np
import pytest
from scipy.special import gammaln

from gibbskit import (
    ExtendedReal,
    ModelValidationError,
    SolverError,
    SweepReport,
    ThermoPoint,
    fit_scaling_exponent,
    high_temperature_diagnostics,
    make_model,
    phase_space_volume,
    predicted_energy_exponent,
    riesz_ratio,
    riesz_ratio_constant,
    semiclassical_constant,
    spectral_sum_report,
    temperature_sweep,
    unit_phase_space_volume,
    weyl_ratio_scan,
)
from gibbskit.errors import ModelValidationError as MVE


def test_semiclassical_constant_closed_values():
    np.testing.assert_allclose(semiclassical_constant(1, 1), 2.0 / (3.0 * math.pi), rtol=1e-14)
    np.testing.assert_allclose(semiclassical_constant(1, 2), 1.0 / (8.0 * math.pi), rtol=1e-14)
    np.testing.assert_allclose(semiclassical_constant(2, 1), 8.0 / (15.0 * math.pi), rtol=1e-14)


def test_unit_volume_quadratic_confinement():
    # integral of (1 - x^2)^{3/2} over [-1, 1] is 3 pi / 8
    np.testing.assert_allclose(unit_phase_space_volume(1, 1, 2.0), 3.0 * math.pi / 8.0, rtol=1e-14)


def test_volume_closed_form_values():
    np.testing.assert_allclose(phase_space_volume(2.0, 1, 1, 2.0), 3.0 * math.pi / 8.0, rtol=1e-14)
    np.testing.assert_allclose(phase_space_volume(5.0, 1, 1, 2.0), 6.0 * math.pi, rtol=1e-14)
    assert phase_space_volume(1.0, 1, 1, 2.0) == 0.0
    assert phase_space_volume(0.2, 1, 1, 2.0) == 0.0


@pytest.mark.parametrize("energy", [2.0, 5.0, 10.0, 50.0])
def test_volume_quadrature_cross_check(energy):
    closed = phase_space_volume(energy, 1, 1, 2.0)
    numeric = phase_space_volume(energy, 1, 1, 2.0, method="quadrature")
    np.testing.assert_allclose(numeric, closed, rtol=1e-8)
    closed2 = phase_space_volume(energy, 1, 2, 3.0)
    numeric2 = phase_space_volume(energy, 1, 2, 3.0, method="quadrature")
    np.testing.assert_allclose(numeric2, closed2, rtol=1e-8)


def test_ratio_constant_values():
    np.testing.assert_allclose(riesz_ratio_constant(1, 1, 2.0), 1.5, rtol=1e-14)
    np.testing.assert_allclose(riesz_ratio_constant(1, 2, 2.0), 2.0, rtol=1e-14)
    np.testing.assert_allclose(riesz_ratio_constant(1, 1, 1000.0), 1.2505, rtol=1e-10)


def test_predicted_exponent_monotone_in_theta():
    base = predicted_energy_exponent(1.0, 1, 2.0)
    np.testing.assert_allclose(base, 0.5, rtol=1e-14)
    np.testing.assert_allclose(predicted_energy_exponent(1.0, 1, 4.0), 1.0 / 1.75, rtol=1e-14)
    assert predicted_energy_exponent(1.0, 1, 4.0) > base


def test_weyl_scan_converges(ham_weyl):
    scan = weyl_ratio_scan(ham_weyl, 1.0, [10.0, 20.0, 40.0, 80.0])
    ratios = [row.ratio for row in scan.rows]
    assert 0.20 <= ratios[-1] <= 0.225
    assert scan.final_relative_deviation < 0.05
    # differences along the doubling scan shrink
    diffs = [abs(b - a) for a, b in zip(ratios, ratios[1:])]
    assert diffs[0] > diffs[1] > diffs[2]


def test_weyl_scan_brute_force_oracle(ham_weyl):
    # direct sum over the analytic spectrum 2j + 2 at E = 60
    levels = 2.0 * np.arange(40) + 2.0
    oracle = float(np.sum(np.clip(60.0 - levels, 0.0, None)))
    volume = (59.0**2) * 3.0 * math.pi / 8.0
    scan = weyl_ratio_scan(ham_weyl, 1.0, [60.0])
    np.testing.assert_allclose(scan.rows[0].riesz, oracle, rtol=1e-3)
    np.testing.assert_allclose(scan.rows[0].ratio, oracle / volume, rtol=1e-3)


def test_riesz_ratio_near_limit(ham_weyl):
    value = riesz_ratio(ham_weyl, 1.0, 60.0)
    assert abs(value - 1.5) / 1.5 < 0.05


def test_spectral_sum_against_direct_summation(ham_main):
    report = spectral_sum_report(ham_main, 0.9)
    oracle = float(np.sum((2.0 * np.arange(ham_main.size) + 2.0) ** -9.0))
    np.testing.assert_allclose(report.value, oracle, rtol=1e-4)
    assert report.converged
    assert report.tail_bound < 1e-15
    # stabilized to nine digits by the 50-level checkpoint
    idx = report.checkpoint_counts.index(50)
    assert abs(report.partial_sums[idx] - report.value) <= 1e-9 * report.value


def test_spectral_sum_potential_integral_closed_form(ham_main):
    # integral of (1 + x^2)^{-8.5} over the line: sqrt(pi) Gamma(8) / Gamma(8.5)
    report = spectral_sum_report(ham_main, 0.9)
    oracle = math.sqrt(math.pi) * math.exp(gammaln(8.0) - gammaln(8.5))
    np.testing.assert_allclose(report.potential_integral, oracle, rtol=1e-9)


def test_spectral_sum_boundary_gamma_rejected(ham_main):
    with pytest.raises(MVE):
        spectral_sum_report(ham_main, 1.0 / 3.0)


def _synthetic_sweep(expo, zero_limit):
    temps = np.geomspace(50.0, 500.0, 10)
    points = tuple(
        ThermoPoint(float(t), -0.1 * float(t) ** 0.5, 3.0 * float(t) ** expo, -1.0, 0.0, 5)
        for t in temps
    )
    return SweepReport(
        model_name="synthetic",
        trace_cap=1.0,
        deriv_limit_zero=zero_limit,
        critical_temperature=0.0,
        temperatures=tuple(float(t) for t in temps),
        points=points,
    )


def test_fit_recovers_synthetic_exponent():
    sweep = _synthetic_sweep(0.5, ExtendedReal.finite(0.0))
    fit = fit_scaling_exponent(sweep, 1.0, 1, 2.0)
    np.testing.assert_allclose(fit.fitted_exponent, 0.5, atol=1e-12)
    np.testing.assert_allclose(fit.predicted_exponent, 0.5, rtol=1e-14)


def test_fit_refuses_unbounded_derivative_models():
    sweep = _synthetic_sweep(0.5, ExtendedReal.neg_inf())
    with pytest.raises(ModelValidationError):
        fit_scaling_exponent(sweep, 1.0, 1, 2.0)


def test_fit_needs_enough_points():
    sweep = _synthetic_sweep(0.5, ExtendedReal.finite(0.0))
    with pytest.raises(SolverError):
        fit_scaling_exponent(sweep, 1.0, 1, 2.0, min_points=11)


def test_high_temperature_trends_finite_rank(ham_weyl):
    model = make_model("tsallis", 1.0, {"q": 2.0})
    sweep = temperature_sweep(model, ham_weyl, 1.0, np.geomspace(50.0, 5000.0, 14))
    trend = high_temperature_diagnostics(sweep)
    assert trend.mu_over_t_nondecreasing
    assert trend.limit_value == 0.0
    assert trend.final_gap_to_limit < 0.05
    assert trend.cutoff_increasing
    assert trend.cutoff_over_t_decreasing
