"""Semiclassical spectral asymptotics for the confined operator.

Large-energy behavior of smoothed eigenvalue counts is governed by the
phase-space volume of the classical symbol:

    Tr(E - H)_+^s  ~  C(s, d) * W_s(E),
    C(s, d) = Gamma(s+1) / ((4 pi)^{d/2} Gamma(s+1+d/2)),
    W_s(E)  = integral |E - V(x)|_+^{s+d/2} dx.

For V = offset + |x|^theta the volume has the closed form
W_s(E) = (E - offset)_+^{s+(1+2/theta) d/2} * W_s(unit) with a Gamma
ratio for the unit volume, and the ratio of consecutive smoothed counts
has the limit

    E * Tr(E-H)_+^s / Tr(E-H)_+^{s+1}  ->  (1 + s + d/2 + d/theta)/(s + 1),

always above one.  A high-temperature sweep of a finite-rank model has
energy growing like T^{1/(1+(1+2/theta) d/(2s))}; the exponent is fitted
here from the top decade of a sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.special import gammaln

from .errors import ModelValidationError, SolverError
from .gibbs import SweepReport
from .numerics import adaptive_simpson
from .spectral import SpectralHamiltonian, riesz_mean, spectral_tail_bound


def semiclassical_constant(order: float, dimension: int) -> float:
    """Limiting ratio C(s, d) of smoothed counts to phase-space volume."""
    if order <= 0.0:
        raise ValueError("order must be positive")
    s, d = float(order), int(dimension)
    return math.exp(gammaln(s + 1.0) - 0.5 * d * math.log(4.0 * math.pi) - gammaln(s + 1.0 + 0.5 * d))


def _sphere_area(dimension: int) -> float:
    # Surface area of the unit (d-1)-sphere.
    d = int(dimension)
    return 2.0 * math.pi ** (0.5 * d) / math.exp(gammaln(0.5 * d))


def unit_phase_space_volume(order: float, dimension: int, theta: float) -> float:
    """Closed-form W_s at unit energy above the potential offset."""
    s, d, th = float(order), int(dimension), float(theta)
    log_val = (
        gammaln(1.0 + s + 0.5 * d)
        + gammaln(d / th)
        - math.log(th)
        - gammaln(1.0 + s + (1.0 + 2.0 / th) * 0.5 * d)
    )
    return _sphere_area(d) * math.exp(log_val)


def phase_space_volume(
    energy: float,
    order: float,
    dimension: int,
    theta: float,
    offset: float = 1.0,
    method: str = "closed_form",
) -> float:
    """W_s(E) for V = offset + |x|^theta; returns 0 at or below the offset.

    method "quadrature" evaluates the radial integral by adaptive
    Simpson for cross-validation of the closed form.
    """
    shifted = energy - offset
    if shifted <= 0.0:
        return 0.0
    s, d, th = float(order), int(dimension), float(theta)
    exponent = s + (1.0 + 2.0 / th) * 0.5 * d
    if method == "closed_form":
        return shifted**exponent * unit_phase_space_volume(s, d, th)
    if method != "quadrature":
        raise ValueError(f"unknown method '{method}'")
    radius = shifted ** (1.0 / th)
    power = s + 0.5 * d

    def integrand(r: float) -> float:
        return max(shifted - r**th, 0.0) ** power * r ** (d - 1.0)

    return _sphere_area(d) * adaptive_simpson(integrand, 0.0, radius, rel_tol=1e-10)


def riesz_ratio_constant(order: float, dimension: int, theta: float) -> float:
    """Limit of E * Tr(E-H)_+^s / Tr(E-H)_+^{s+1}; always exceeds one."""
    if order <= 0.0 or theta <= 0.0:
        raise ValueError("order and theta must be positive")
    value = (1.0 + order + 0.5 * dimension + dimension / theta) / (order + 1.0)
    if value <= 1.0:
        raise SolverError("ratio constant not above one; inconsistent parameters")
    return value


@dataclass(frozen=True)
class WeylScanRow:
    energy: float
    riesz: float
    volume: float
    ratio: float


@dataclass(frozen=True)
class WeylScan:
    order: float
    target: float
    rows: tuple

    @property
    def final_relative_deviation(self) -> float:
        return abs(self.rows[-1].ratio - self.target) / self.target


def weyl_ratio_scan(ham: SpectralHamiltonian, order: float, energies) -> WeylScan:
    """Smoothed count over phase-space volume across an energy grid."""
    target = semiclassical_constant(order, ham.grid.dimension)
    rows = []
    for e in np.asarray(energies, dtype=float):
        tr = riesz_mean(ham, float(e), order)
        vol = phase_space_volume(
            float(e), order, ham.grid.dimension, ham.potential.theta, ham.potential.offset
        )
        rows.append(WeylScanRow(float(e), tr, vol, tr / vol if vol > 0.0 else math.inf))
    return WeylScan(order=order, target=target, rows=tuple(rows))


def riesz_ratio(ham: SpectralHamiltonian, order: float, energy: float) -> float:
    """E * Tr(E-H)_+^s / Tr(E-H)_+^{s+1} at one energy."""
    upper = riesz_mean(ham, energy, order + 1.0)
    if upper == 0.0:
        raise SolverError("empty smoothed count; energy below the ground state")
    return energy * riesz_mean(ham, energy, order) / upper


@dataclass(frozen=True)
class SpectralSumReport:
    """Convergence of the inverse-power eigenvalue sum."""

    exponent: float
    partial_sums: tuple
    checkpoint_counts: tuple
    value: float
    tail_bound: float
    potential_integral: float
    converged: bool


def spectral_sum_report(ham: SpectralHamiltonian, gamma: float) -> SpectralSumReport:
    """Partial sums of lambda_j^(-gamma/(1-gamma)) with a tail certificate.

    Requires gamma/(1-gamma) > d/2 strictly (so the sum and the
    comparison integral of V^{d/2 - gamma/(1-gamma)} are finite).
    """
    d = ham.grid.dimension
    if not (d / (d + 2.0) < gamma < 1.0):
        raise ModelValidationError(
            f"gamma={gamma} outside the open interval ({d / (d + 2.0)}, 1)"
        )
    delta = gamma / (1.0 - gamma)
    evals = ham.eigenvalues
    checkpoints = [k for k in (10, 25, 50, 100, 200, 400, 800) if k <= evals.size]
    if not checkpoints or checkpoints[-1] != evals.size:
        checkpoints.append(evals.size)
    partial = [float(np.sum(evals[:k] ** (-delta))) for k in checkpoints]
    tail = spectral_tail_bound(ham, lambda y: y**-delta)
    theta = ham.potential.theta
    exponent_v = 0.5 * d - delta

    if d == 1:
        integral = 2.0 * quad(lambda x: (1.0 + x**theta) ** exponent_v, 0.0, np.inf, limit=200)[0]
    else:
        integral = (
            2.0
            * math.pi
            * quad(lambda r: r * (1.0 + r**theta) ** exponent_v, 0.0, np.inf, limit=200)[0]
        )
    converged = len(partial) >= 2 and abs(partial[-1] - partial[-2]) <= 1e-9 * abs(partial[-1])
    return SpectralSumReport(
        exponent=delta,
        partial_sums=tuple(partial),
        checkpoint_counts=tuple(checkpoints),
        value=partial[-1],
        tail_bound=tail,
        potential_integral=integral,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# high-temperature scaling
# ---------------------------------------------------------------------------


def predicted_energy_exponent(order: float, dimension: int, theta: float) -> float:
    """High-temperature growth exponent of the sweep energy."""
    return 1.0 / (1.0 + (1.0 + 2.0 / theta) * dimension / (2.0 * order))


@dataclass(frozen=True)
class ScalingFit:
    fitted_exponent: float
    predicted_exponent: float
    window: tuple
    point_count: int


def fit_scaling_exponent(
    sweep: SweepReport, order: float, dimension: int, theta: float, min_points: int = 8
) -> ScalingFit:
    """Least-squares slope of log E against log T over the top decade.

    Only meaningful for models whose entropy derivative is finite at
    zero (finite-rank states); refuses otherwise.
    """
    if not sweep.deriv_limit_zero.is_finite:
        raise ModelValidationError(
            "scaling exponent applies to finite-rank models only "
            "(entropy derivative finite at zero)"
        )
    points = sweep.ok_points()
    if not points:
        raise SolverError("sweep has no successful rows")
    t_max = points[-1].temperature
    window = [p for p in points if p.temperature >= t_max / 10.0]
    if len(window) < min_points:
        raise SolverError(
            f"only {len(window)} sweep points in the top decade; need {min_points}"
        )
    log_t = np.log([p.temperature for p in window])
    log_e = np.log([p.energy for p in window])
    slope = float(np.polyfit(log_t, log_e, 1)[0])
    return ScalingFit(
        fitted_exponent=slope,
        predicted_exponent=predicted_energy_exponent(order, dimension, theta),
        window=(float(window[0].temperature), float(window[-1].temperature)),
        point_count=len(window),
    )


@dataclass(frozen=True)
class HighTemperatureReport:
    """Chemical-potential trends along a sweep."""

    mu_over_t: tuple
    mu_over_t_nondecreasing: bool
    limit_value: float | None  # -deriv_limit_zero when finite
    final_gap_to_limit: float | None
    cutoff_energies: tuple | None
    cutoff_increasing: bool | None
    cutoff_over_t_decreasing: bool | None


def high_temperature_diagnostics(sweep: SweepReport) -> HighTemperatureReport:
    """mu/T monotonicity and, for finite-rank models, cutoff growth.

    The cutoff energy alpha(T) = -T s'(0) - mu_T must increase while
    alpha(T)/T decreases over the top decade of the sweep.
    """
    points = sweep.ok_points()
    if len(points) < 2:
        raise SolverError("need at least two successful sweep rows")
    mu_over_t = np.array([p.chemical_potential / p.temperature for p in points])
    nondecreasing = bool(np.all(np.diff(mu_over_t) >= -1e-10))
    if not sweep.deriv_limit_zero.is_finite:
        return HighTemperatureReport(
            mu_over_t=tuple(float(v) for v in mu_over_t),
            mu_over_t_nondecreasing=nondecreasing,
            limit_value=None,
            final_gap_to_limit=None,
            cutoff_energies=None,
            cutoff_increasing=None,
            cutoff_over_t_decreasing=None,
        )
    limit = -sweep.deriv_limit_zero.value
    alphas = np.array(
        [
            p.temperature * (limit - p.chemical_potential / p.temperature)
            for p in points
        ]
    )
    temps = np.array([p.temperature for p in points])
    top = temps >= temps[-1] / 10.0
    a_top, t_top = alphas[top], temps[top]
    return HighTemperatureReport(
        mu_over_t=tuple(float(v) for v in mu_over_t),
        mu_over_t_nondecreasing=nondecreasing,
        limit_value=limit,
        final_gap_to_limit=float(abs(mu_over_t[-1] - limit)),
        cutoff_energies=tuple(float(a) for a in alphas),
        cutoff_increasing=bool(np.all(np.diff(a_top) > 0.0)),
        cutoff_over_t_decreasing=bool(np.all(np.diff(a_top / t_top) < 0.0)),
    )
