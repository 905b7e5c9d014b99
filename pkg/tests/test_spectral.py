"""Discretized operator: oscillator oracle, counting and smoothed counts.

The quadratic confinement 1 + x^2 has the exact spectrum 2j + 2 on the
line, which anchors every check here.
"""

import numpy as np
import pytest
from scipy.integrate import quad

from gibbskit import (
    ConfigError,
    GridSpec,
    PotentialSpec,
    UntrustedSpectrumError,
    assemble_and_solve,
    counting_function,
    counting_upper_bound,
    riesz_mean,
)


def oscillator_levels(count):
    return 2.0 * np.arange(count) + 2.0


def test_oscillator_oracle(ham_main):
    expected = oscillator_levels(12)
    np.testing.assert_allclose(ham_main.eigenvalues[:12], expected, rtol=5e-4)


def test_ground_energy_above_floor_and_gap(ham_main):
    assert ham_main.ground_energy > 1.0
    np.testing.assert_allclose(ham_main.spectral_gap, 2.0, rtol=1e-3)


def test_orthonormality_weighted(ham_main):
    h = ham_main.grid.spacing
    sub = ham_main.eigenvectors[:, :20]
    gram = h * (sub.T @ sub)
    np.testing.assert_allclose(gram, np.eye(20), atol=1e-8)


def test_phase_convention_deterministic():
    grid = GridSpec(1, 8.0, 400)
    pot = PotentialSpec(2.0)
    first = assemble_and_solve(grid, pot, 10)
    second = assemble_and_solve(grid, pot, 10)
    np.testing.assert_array_equal(first.eigenvectors, second.eigenvectors)


def test_counting_function(ham_main):
    assert counting_function(ham_main, 7.0) == 3
    assert counting_function(ham_main, 1.5) == 0
    assert counting_function(ham_main, ham_main.ground_energy) == 1


def test_riesz_mean_values(ham_main):
    np.testing.assert_allclose(riesz_mean(ham_main, 5.0, 1.0), 4.0, rtol=1e-3)
    np.testing.assert_allclose(riesz_mean(ham_main, 5.0, 2.0), 10.0, rtol=1e-3)
    assert riesz_mean(ham_main, 1.0, 1.0) == 0.0
    assert riesz_mean(ham_main, ham_main.ground_energy, 1.0) == 0.0


def test_untrusted_energy_rejected(ham_coarse):
    too_high = ham_coarse.trusted_top + 1.0
    with pytest.raises(UntrustedSpectrumError):
        counting_function(ham_coarse, too_high)
    with pytest.raises(UntrustedSpectrumError):
        riesz_mean(ham_coarse, too_high, 1.0)


def test_count_precondition():
    grid = GridSpec(1, 6.0, 50)
    with pytest.raises(ConfigError):
        assemble_and_solve(grid, PotentialSpec(2.0), 51)


def test_grid_refinement_second_order():
    # nested grids: N -> 2N+1 halves the spacing exactly
    pot = PotentialSpec(2.0)
    sizes = (299, 599, 1199)
    levels = [assemble_and_solve(GridSpec(1, 10.0, n), pot, 11).eigenvalues for n in sizes]
    d12 = levels[0] - levels[1]
    d23 = levels[1] - levels[2]
    order = np.log2(np.abs(d12 / d23))
    assert np.all(np.abs(order - 2.0) < 0.3)


def test_domain_enlargement_insensitive():
    # fixed spacing h = 0.01, half widths 10 and 14
    pot = PotentialSpec(2.0)
    small = assemble_and_solve(GridSpec(1, 10.0, 1999), pot, 11).eigenvalues
    large = assemble_and_solve(GridSpec(1, 14.0, 2799), pot, 11).eigenvalues
    np.testing.assert_allclose(small, large, rtol=1e-8)


def test_riesz_equals_integral_of_counting(ham_main):
    # sum (E - lambda)_+ equals the exact piecewise integral of N over [0, E]
    energy = 21.0
    evals = ham_main.eigenvalues
    exact_integral = float(np.sum(np.clip(energy - evals, 0.0, None)))
    np.testing.assert_allclose(riesz_mean(ham_main, energy, 1.0), exact_integral, rtol=1e-12)


def test_riesz_layer_cake_identity(ham_main):
    # Tr(E-H)_+^s = s * integral y^{s-1} N(E-y) dy for s = 2
    energy, order = 15.0, 2.0
    evals = ham_main.eigenvalues

    def integrand(y):
        return order * y ** (order - 1.0) * np.searchsorted(evals, energy - y, side="right")

    breaks = sorted(float(energy - lam) for lam in evals if lam < energy)
    value, _ = quad(integrand, 0.0, energy - evals[0] + 1e-12, points=breaks, limit=200)
    np.testing.assert_allclose(riesz_mean(ham_main, energy, order), value, rtol=1e-9)


def test_counting_upper_bound_dominates(ham_main):
    pot = ham_main.potential
    for energy in (5.0, 20.0, 60.0, 200.0):
        bound = counting_upper_bound(pot, 1, energy)
        assert bound >= counting_function(ham_main, energy)


def test_two_dimensional_spectrum():
    # Levels of -Laplacian + 1 + r^2 are 2(n1 + n2) + 3: 3, 5, 5, 7, 7, 7
    ham = assemble_and_solve(GridSpec(2, 7.0, 120), PotentialSpec(2.0), 8)
    expected = np.array([3.0, 5.0, 5.0, 7.0, 7.0, 7.0])
    np.testing.assert_allclose(ham.eigenvalues[:6], expected, rtol=5e-3)
    h = ham.grid.spacing
    gram = h**2 * (ham.eigenvectors.T @ ham.eigenvectors)
    np.testing.assert_allclose(gram, np.eye(ham.size), atol=1e-8)
