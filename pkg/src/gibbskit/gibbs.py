"""Equilibrium states minimizing energy + T * entropy at fixed total trace.

The minimizer over occupation sequences is occupation((lambda_j + mu)/T)
with a spectral cutoff when the entropy derivative is finite at zero,
and the chemical potential mu solves the trace equation

    Z_T(mu) = sum_j occupation((lambda_j + mu)/T) = n_bar

by monotone bisection (Z_T is continuous and strictly decreasing).  In
the doubly-finite endpoint regime there is a positive critical
temperature gap/(cap_limit - zero_limit); at or below it the trace
equation pins mu at its lower endpoint and the state collapses to the
ground-state projector scaled by n_bar.

Every solve certifies that the occupation weight carried by eigenvalues
beyond the trusted spectrum is negligible.  Two certificates are
offered: "continuum" bounds the tail of the underlying operator on the
whole space through the power-law majorant of the occupation map and a
bracketing bound on the counting function; "discrete" bounds the
remainder of the assembled finite matrix spectrum only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .entropy import EntropyModel, ExtendedReal
from .errors import InfeasibleConstraintError, SolverError, UntrustedSpectrumError
from .numerics import adaptive_simpson, bisect_residual, expand_bracket_down, expand_bracket_up
from .spectral import SpectralHamiltonian, spectral_tail_bound

TRACE_RTOL = 1e-9
TAIL_TOL_FACTOR = 1e-10
ENERGY_RTOL = 1e-7
IDENTITY_RTOL = 1e-7
OPTIMALITY_SLACK = 1e-9


# ---------------------------------------------------------------------------
# states and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GibbsState:
    """Occupations of the trusted eigenbasis at one temperature.

    ``cutoff_rank`` is the largest occupied level index when the
    entropy derivative is finite at zero (-1 when no level qualifies)
    and None when every level carries weight.  ``gauge`` holds a phase
    wavevector applied lazily by the observables layer.
    """

    model: EntropyModel
    spectrum: SpectralHamiltonian
    temperature: float
    chemical_potential: float
    occupations: np.ndarray
    cutoff_rank: int | None
    gauge: np.ndarray | None = None

    @property
    def trace(self) -> float:
        return float(np.sum(self.occupations))

    def energy(self) -> float:
        return float(np.dot(self.spectrum.eigenvalues, self.occupations))

    def entropy(self) -> float:
        return float(np.sum(self.model.entropy_density(self.occupations)))

    def free_energy(self) -> float:
        return self.energy() + self.temperature * self.entropy()


@dataclass(frozen=True)
class ThermoPoint:
    """One row of a temperature sweep."""

    temperature: float
    chemical_potential: float
    energy: float
    entropy: float
    free_energy: float
    rank: int


@dataclass(frozen=True)
class SweepReport:
    """Thermodynamic rows over a temperature grid plus consistency flags."""

    model_name: str
    trace_cap: float
    deriv_limit_zero: ExtendedReal
    critical_temperature: float
    temperatures: tuple
    points: tuple
    row_errors: dict = field(default_factory=dict)
    energy_strictly_increasing: bool = True
    entropy_strictly_decreasing: bool = True
    mu_over_t_nondecreasing: bool = True
    energy_floor_ok: bool = True
    identity_residual: float | None = None

    def ok_points(self) -> list[ThermoPoint]:
        return [p for p in self.points if p is not None]


@dataclass(frozen=True)
class OptimalityReport:
    """Free-energy gaps of trial occupation sequences against a state."""

    trial_count: int
    min_gap: float
    all_nonnegative: bool


@dataclass(frozen=True)
class DerivativeReport:
    """Analytic versus finite-difference temperature derivatives."""

    temperature: float
    mu_prime_analytic: float
    mu_prime_fd: float
    mu_prime_rel_error: float
    entropy_energy_residual: float


@dataclass(frozen=True)
class GlobalMinimizer:
    """Entropy minimizer under total trace, current and energy constraints.

    The stored state has zero current; applying the gauge vector through
    the observables layer delivers the requested total current while
    leaving occupations and entropy unchanged.
    """

    state: GibbsState
    gauge_vector: np.ndarray
    temperature: float


# ---------------------------------------------------------------------------
# elementary pieces
# ---------------------------------------------------------------------------


def chemical_potential_floor(model: EntropyModel, ham: SpectralHamiltonian, temperature: float) -> float:
    """Least admissible mu: -T * s'(cap) - lambda_0 (or -inf)."""
    if not model.deriv_limit_cap.is_finite:
        return -math.inf
    return -temperature * model.deriv_limit_cap.value - ham.ground_energy


def cutoff_energy(model: EntropyModel, temperature: float, mu: float) -> float:
    """Energy threshold above which levels are unoccupied (finite-rank)."""
    if not model.finite_rank:
        return math.inf
    return -temperature * model.deriv_limit_zero.value - mu


def occupations_at(model: EntropyModel, ham: SpectralHamiltonian, temperature: float, mu: float) -> np.ndarray:
    return model.thermal_occupation(temperature, ham.eigenvalues + mu)


def cutoff_rank_at(model: EntropyModel, ham: SpectralHamiltonian, temperature: float, mu: float) -> int | None:
    if not model.finite_rank:
        return None
    threshold = cutoff_energy(model, temperature, mu)
    return int(np.searchsorted(ham.eigenvalues, threshold, side="right")) - 1


def partition_function(model: EntropyModel, ham: SpectralHamiltonian, temperature: float, mu: float) -> float:
    """Total occupation Z_T(mu) over the trusted spectrum."""
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    floor = chemical_potential_floor(model, ham, temperature)
    if mu < floor - 1e-12 * max(1.0, abs(floor)):
        raise ValueError(
            f"mu={mu} below the admissible floor {floor}; occupations would "
            f"exceed the inverse map's range"
        )
    return float(np.sum(occupations_at(model, ham, temperature, mu)))


def critical_temperature(model: EntropyModel, ham: SpectralHamiltonian) -> float:
    """gap / (cap_limit - zero_limit) when both limits are finite, else 0."""
    if ham.size < 2:
        raise ValueError("critical temperature needs at least two eigenvalues")
    if model.deriv_limit_zero.is_finite and model.deriv_limit_cap.is_finite:
        return ham.spectral_gap / (model.deriv_limit_cap.value - model.deriv_limit_zero.value)
    return 0.0


# ---------------------------------------------------------------------------
# truncation-tail certificates
# ---------------------------------------------------------------------------


def truncation_tail_bound(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    temperature: float,
    mu: float,
    tail_rule: str = "continuum",
) -> float:
    """Certified bound on occupation weight beyond the trusted spectrum.

    continuum: bounds the tail of the whole-space operator through the
    power-law occupation majorant and a Neumann-bracketing counting
    bound.  discrete: bounds the remainder of the assembled matrix
    spectrum by counting untrusted modes at the trusted top.
    """
    top = ham.trusted_top
    if tail_rule == "discrete":
        remaining = ham.grid.total_points - ham.size
        return remaining * float(model.thermal_occupation(temperature, top + mu))
    if tail_rule != "continuum":
        raise ValueError(f"unknown tail rule '{tail_rule}'")

    if model.finite_rank:
        if cutoff_energy(model, temperature, mu) <= top:
            return 0.0
        raise UntrustedSpectrumError(
            f"occupied levels extend to energy {cutoff_energy(model, temperature, mu):.6g} "
            f"beyond the trusted top {top:.6g}; increase the eigenpair count"
        )

    gamma = model.growth_exponent
    power = 1.0 / (1.0 - gamma)
    t0 = -float(np.asarray(model.entropy_deriv(np.array([model.growth_ref])))[0])
    if (top + mu) / temperature < t0:
        raise UntrustedSpectrumError(
            "trusted spectrum ends before the occupation majorant applies "
            f"((top+mu)/T = {(top + mu) / temperature:.4g} < {t0:.4g}); "
            "increase the eigenpair count or the grid"
        )
    growth_p = 0.5 + 1.0 / ham.potential.theta
    needed = growth_p if ham.grid.dimension == 1 else 2.0 * growth_p
    if power <= needed + 1e-9:
        raise UntrustedSpectrumError(
            f"growth exponent {gamma} too small for a convergent continuum "
            f"tail bound in dimension {ham.grid.dimension}"
        )
    const = (model.growth_constant * temperature) ** power

    def majorant(y: float) -> float:
        return const * (y + mu) ** (-power)

    return spectral_tail_bound(ham, majorant)


def _certify(model, ham, temperature, mu, n_bar, tail_rule):
    bound = truncation_tail_bound(model, ham, temperature, mu, tail_rule)
    if bound > TAIL_TOL_FACTOR * n_bar:
        raise UntrustedSpectrumError(
            f"certified truncation tail {bound:.3e} exceeds "
            f"{TAIL_TOL_FACTOR * n_bar:.3e} at T={temperature}; increase the "
            f"eigenpair count or the grid resolution"
        )


# ---------------------------------------------------------------------------
# chemical potential and state construction
# ---------------------------------------------------------------------------


def _require_matching_cap(model: EntropyModel, n_bar: float) -> None:
    if abs(n_bar - model.trace_cap) > 1e-12 * max(1.0, abs(n_bar)):
        raise ValueError(
            f"trace target {n_bar} must equal the model trace cap "
            f"{model.trace_cap}; rebuild the model for a different cap"
        )


def solve_chemical_potential(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    temperature: float,
    n_bar: float,
    tail_rule: str = "continuum",
    certify: bool = True,
) -> float:
    """Solve Z_T(mu) = n_bar by bisection on the decreasing trace map.

    At or below the critical temperature in the doubly-finite endpoint
    regime the solution is pinned at the admissible floor and returned
    without root finding.
    """
    _require_matching_cap(model, n_bar)
    if temperature <= 0.0:
        raise ValueError("temperature must be positive")
    doubly_finite = model.deriv_limit_zero.is_finite and model.deriv_limit_cap.is_finite
    if doubly_finite and temperature <= critical_temperature(model, ham):
        mu = chemical_potential_floor(model, ham, temperature)
        if certify:
            _certify(model, ham, temperature, mu, n_bar, tail_rule)
        return mu

    def trace_of(mu: float) -> float:
        return float(np.sum(occupations_at(model, ham, temperature, mu)))

    if model.deriv_limit_cap.is_finite:
        lo = chemical_potential_floor(model, ham, temperature) + 1e-12
    else:
        lo = expand_bracket_down(trace_of, -ham.ground_energy, lambda z: z >= n_bar)
    hi = expand_bracket_up(trace_of, max(lo, -ham.ground_energy) + 1.0, lambda z: z < n_bar)
    mu = bisect_residual(trace_of, lo, hi, n_bar, residual_tol=TRACE_RTOL * n_bar)
    if certify:
        _certify(model, ham, temperature, mu, n_bar, tail_rule)
    return mu


def build_state(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    temperature: float,
    n_bar: float,
    tail_rule: str = "continuum",
) -> GibbsState:
    """Construct the free-energy minimizer at the given temperature.

    At or below the critical temperature in the doubly-finite regime the
    minimizer is the ground-state projector scaled by n_bar, assembled
    directly so the occupations are exact.
    """
    mu = solve_chemical_potential(model, ham, temperature, n_bar, tail_rule=tail_rule)
    doubly_finite = model.deriv_limit_zero.is_finite and model.deriv_limit_cap.is_finite
    if doubly_finite and temperature <= critical_temperature(model, ham):
        occ = np.zeros(ham.size)
        occ[0] = n_bar
    else:
        occ = occupations_at(model, ham, temperature, mu)
    total = float(np.sum(occ))
    if abs(total - n_bar) > TRACE_RTOL * n_bar:
        raise SolverError(f"trace defect {abs(total - n_bar):.3e} after the solve")
    if np.any(np.diff(occ) > 1e-12 * n_bar):
        raise SolverError("occupations are not nonincreasing in the level index")
    occ = occ.copy()
    occ.setflags(write=False)
    return GibbsState(
        model=model,
        spectrum=ham,
        temperature=temperature,
        chemical_potential=mu,
        occupations=occ,
        cutoff_rank=cutoff_rank_at(model, ham, temperature, mu),
    )


def thermo_point(state: GibbsState) -> ThermoPoint:
    energy = state.energy()
    entropy = state.entropy()
    floor = state.spectrum.ground_energy * state.model.trace_cap
    if energy < floor - 1e-9 * max(1.0, abs(floor)):
        raise SolverError(f"energy {energy} fell below the ground floor {floor}")
    rank = state.cutoff_rank if state.cutoff_rank is not None else state.spectrum.size
    return ThermoPoint(
        temperature=state.temperature,
        chemical_potential=state.chemical_potential,
        energy=energy,
        entropy=entropy,
        free_energy=energy + state.temperature * entropy,
        rank=rank,
    )


# ---------------------------------------------------------------------------
# optimality of the minimizer
# ---------------------------------------------------------------------------


def check_optimality(state: GibbsState, trials: Iterable[np.ndarray]) -> OptimalityReport:
    """Compare trial free energies against the state; gaps must be >= 0.

    Each trial is an occupation sequence on the trusted spectrum that is
    nonnegative, bounded by the trace cap and sums to the same trace.
    """
    n_bar = state.model.trace_cap
    evals = state.spectrum.eigenvalues
    f_state = state.free_energy()
    min_gap = math.inf
    count = 0
    for trial in trials:
        trial = np.asarray(trial, dtype=float)
        if trial.size > evals.size:
            raise ValueError("trial occupations exceed the trusted spectrum size")
        if np.any(trial < -1e-12) or np.any(trial > n_bar * (1.0 + 1e-12)):
            raise ValueError("trial occupations leave [0, n_bar]")
        if abs(float(np.sum(trial)) - n_bar) > TRACE_RTOL * n_bar:
            raise ValueError("trial violates the trace constraint")
        f_trial = float(np.dot(evals[: trial.size], trial)) + state.temperature * float(
            np.sum(state.model.entropy_density(trial))
        )
        min_gap = min(min_gap, f_trial - f_state)
        count += 1
    if count == 0:
        raise ValueError("no trial supplied")
    return OptimalityReport(
        trial_count=count,
        min_gap=min_gap,
        all_nonnegative=min_gap >= -OPTIMALITY_SLACK,
    )


def random_feasible_occupations(
    state: GibbsState,
    count: int,
    rng: np.random.Generator,
    active_levels: int = 12,
) -> list[np.ndarray]:
    """Seeded feasible perturbations of the state occupations.

    Convex combinations of the state with Dirichlet-weighted mass on the
    lowest levels stay inside [0, n_bar] and keep the exact trace.
    """
    n_bar = state.model.trace_cap
    m = min(active_levels, state.spectrum.size)
    trials = []
    for _ in range(count):
        weights = rng.dirichlet(np.ones(m))
        probe = np.zeros_like(state.occupations)
        probe[:m] = n_bar * weights
        mix = rng.uniform(0.05, 0.5)
        trial = (1.0 - mix) * state.occupations + mix * probe
        trial *= n_bar / float(np.sum(trial))
        trials.append(trial)
    return trials


# ---------------------------------------------------------------------------
# sweeps and identities
# ---------------------------------------------------------------------------


def temperature_sweep(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    n_bar: float,
    temperatures: Sequence[float],
    tail_rule: str = "continuum",
    identity_check: bool = False,
) -> SweepReport:
    """Thermodynamic rows over an increasing temperature grid.

    Solve failures are recorded per row instead of aborting the sweep.
    Monotonicity flags are evaluated over the rows above the critical
    temperature.
    """
    temps = np.asarray(list(temperatures), dtype=float)
    if np.any(np.diff(temps) <= 0.0):
        raise ValueError("temperature grid must be strictly increasing")
    tc = critical_temperature(model, ham)
    points: list[ThermoPoint | None] = []
    errors: dict[int, str] = {}
    for i, t in enumerate(temps):
        try:
            points.append(thermo_point(build_state(model, ham, float(t), n_bar, tail_rule=tail_rule)))
        except (SolverError, UntrustedSpectrumError) as exc:
            points.append(None)
            errors[i] = str(exc)

    floor = ham.ground_energy * n_bar
    above = [p for p in points if p is not None and p.temperature > tc]
    energies = np.array([p.energy for p in above])
    entropies = np.array([p.entropy for p in above])
    ok_rows = [p for p in points if p is not None]
    mu_over_t = np.array([p.chemical_potential / p.temperature for p in ok_rows])
    report = SweepReport(
        model_name=model.name,
        trace_cap=n_bar,
        deriv_limit_zero=model.deriv_limit_zero,
        critical_temperature=tc,
        temperatures=tuple(float(t) for t in temps),
        points=tuple(points),
        row_errors=errors,
        energy_strictly_increasing=bool(np.all(np.diff(energies) > 0.0)) if len(above) > 1 else True,
        entropy_strictly_decreasing=bool(np.all(np.diff(entropies) < 0.0)) if len(above) > 1 else True,
        mu_over_t_nondecreasing=bool(np.all(np.diff(mu_over_t) >= -1e-10)) if len(ok_rows) > 1 else True,
        energy_floor_ok=bool(
            all(p.energy >= floor - 1e-9 * max(1.0, abs(floor)) for p in ok_rows)
        ),
    )
    if identity_check and len(above) >= 2:
        resid = free_energy_identity_residual(
            model, ham, n_bar, above[0].temperature, above[-1].temperature, tail_rule=tail_rule
        )
        report = replace(report, identity_residual=resid)
    return report


def free_energy_identity_residual(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    n_bar: float,
    t1: float,
    t2: float,
    tail_rule: str = "continuum",
) -> float:
    """Residual of F(T2) - F(T1) = integral of the entropy over [T1, T2].

    The right side is evaluated by adaptive Simpson quadrature on the
    entropy of the equilibrium state at each intermediate temperature.
    Relative residual, normalized by max(1, |lhs|).
    """
    if t1 > t2:
        raise ValueError("need t1 <= t2")
    tc = critical_temperature(model, ham)
    if t1 <= tc:
        raise ValueError(f"t1={t1} must exceed the critical temperature {tc}")
    if t1 == t2:
        return 0.0
    state1 = build_state(model, ham, t1, n_bar, tail_rule=tail_rule)
    state2 = build_state(model, ham, t2, n_bar, tail_rule=tail_rule)
    lhs = state2.free_energy() - state1.free_energy()

    def entropy_of(tau: float) -> float:
        return build_state(model, ham, tau, n_bar, tail_rule=tail_rule).entropy()

    rhs = adaptive_simpson(entropy_of, t1, t2, rel_tol=IDENTITY_RTOL)
    return abs(lhs - rhs) / max(1.0, abs(lhs))


def derivative_diagnostics(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    n_bar: float,
    temperature: float,
    fd_step_rel: float = 1e-4,
    tail_rule: str = "continuum",
) -> DerivativeReport:
    """Analytic mu'(T) against finite differences, plus the entropy rate.

    The analytic rate is mu/T + <H>_w / T with weights from the
    derivative of the occupation map on the occupied levels; the second
    diagnostic checks dS/dT + (1/T) dE/dT = 0 by centered differences.
    """
    tc = critical_temperature(model, ham)
    if temperature <= tc:
        raise ValueError("derivative diagnostics need T above the critical temperature")
    step = fd_step_rel * temperature
    if temperature - step <= tc:
        raise ValueError("finite-difference step crosses the critical temperature")

    mu = solve_chemical_potential(model, ham, temperature, n_bar, tail_rule=tail_rule)
    weights = model.thermal_occupation_prime(temperature, ham.eigenvalues + mu)
    wsum = float(np.sum(weights))
    if wsum == 0.0:
        raise SolverError("occupation derivative vanished on every level")
    mean_energy = float(np.dot(ham.eigenvalues, weights)) / wsum
    analytic = mu / temperature + mean_energy / temperature

    lo = build_state(model, ham, temperature - step, n_bar, tail_rule=tail_rule)
    hi = build_state(model, ham, temperature + step, n_bar, tail_rule=tail_rule)
    fd = (hi.chemical_potential - lo.chemical_potential) / (2.0 * step)
    rel_mu = abs(analytic - fd) / max(abs(analytic), abs(fd), 1e-300)

    de = (hi.energy() - lo.energy()) / (2.0 * step)
    ds = (hi.entropy() - lo.entropy()) / (2.0 * step)
    resid = abs(ds + de / temperature) / max(abs(ds), abs(de) / temperature, 1e-300)
    return DerivativeReport(
        temperature=temperature,
        mu_prime_analytic=analytic,
        mu_prime_fd=fd,
        mu_prime_rel_error=rel_mu,
        entropy_energy_residual=resid,
    )


# ---------------------------------------------------------------------------
# temperature inversion and the global minimizer
# ---------------------------------------------------------------------------


def temperature_for_energy(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    n_bar: float,
    target: float,
    tail_rule: str = "continuum",
) -> float:
    """Invert the strictly increasing energy map E(T) = target."""
    _require_matching_cap(model, n_bar)
    floor = ham.ground_energy * n_bar
    if target <= floor:
        raise InfeasibleConstraintError(
            f"energy target {target} is not above the ground floor {floor}"
        )

    def energy_of(t: float) -> float:
        return build_state(model, ham, t, n_bar, tail_rule=tail_rule).energy()

    tc = critical_temperature(model, ham)
    t_lo = tc + 1.0 if tc > 0.0 else 1.0
    for _ in range(200):
        if energy_of(t_lo) < target:
            break
        t_lo = tc + (t_lo - tc) / 2.0 if tc > 0.0 else t_lo / 2.0
        if t_lo - tc < 1e-13 * max(1.0, tc):
            raise SolverError("no temperature with energy below the target")
    else:
        raise SolverError("lower temperature bracket not found")
    t_hi = max(2.0 * t_lo, t_lo + 1.0)
    for _ in range(100):
        if energy_of(t_hi) > target:
            break
        t_hi *= 2.0
    else:
        raise SolverError("upper temperature bracket not found")
    return bisect_residual(
        energy_of,
        t_lo,
        t_hi,
        target,
        residual_tol=ENERGY_RTOL * max(abs(target), 1e-30),
        decreasing=False,
    )


def global_entropy_minimizer(
    model: EntropyModel,
    ham: SpectralHamiltonian,
    trace_target: float,
    current_target,
    energy_target: float,
    tail_rule: str = "continuum",
) -> GlobalMinimizer:
    """Entropy minimizer at fixed total trace, current and energy.

    Solves the temperature from E(T) = energy_target - |b0|^2 / a0,
    builds the zero-current state with trace cap a0, and reports the
    gauge wavevector b0/a0 that restores the requested total current
    (applied downstream by the observables layer).
    """
    b0 = np.atleast_1d(np.asarray(current_target, dtype=float))
    if b0.size != ham.grid.dimension:
        raise ValueError("current target must have one component per dimension")
    if trace_target <= 0.0:
        raise ValueError("trace target must be positive")
    feasibility_floor = trace_target * ham.ground_energy + float(np.dot(b0, b0)) / trace_target
    if energy_target <= feasibility_floor:
        raise InfeasibleConstraintError(
            f"energy target {energy_target} must exceed "
            f"a0*lambda0 + |b0|^2/a0 = {feasibility_floor}"
        )
    if abs(model.trace_cap - trace_target) > 1e-12 * max(1.0, trace_target):
        if model.name == "custom":
            raise ValueError(
                "custom models cannot be re-capped automatically; rebuild "
                "the model with trace cap equal to the trace target"
            )
        from .entropy import make_model

        model = make_model(model.name, trace_target, model.params)
    reduced = energy_target - float(np.dot(b0, b0)) / trace_target
    temp = temperature_for_energy(model, ham, trace_target, reduced, tail_rule=tail_rule)
    state = build_state(model, ham, temp, trace_target, tail_rule=tail_rule)
    return GlobalMinimizer(state=state, gauge_vector=b0 / trace_target, temperature=temp)
