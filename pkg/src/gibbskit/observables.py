"""Local fields of a finite-rank state: density, current, kinetic energy.

For occupations nu_p and grid eigenfunctions phi_p,

    n = sum nu_p |phi_p|^2
    u = sum nu_p Im(phi_p^* grad phi_p)
    k = sum nu_p |grad phi_p|^2
    e = k + V n

with gradients by centered differences in the interior and one-sided
stencils at the walls.  The half density gradient
R = sum nu_p Re(phi_p^* grad phi_p) (= grad n / 2 in the continuum) is
kept alongside, and the square-root density gradient is reported as
R / sqrt(n): with that choice the pointwise compatibility bound
n k >= |R|^2 + |u|^2 is an exact Cauchy-Schwarz identity of the
discrete sums, so the check is free of discretization slack.

The phase transform state -> e^{i b.x} state e^{-i b.x} is stored
lazily as the wavevector b; field computation applies the closed-form
transformed fields.  A materializing path that differentiates the
phased functions directly (exact product rule through the phase) is
provided for independent cross-checks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .spectral import GridSpec, SpectralHamiltonian

DENSITY_FLOOR = 1e-12
COMPAT_SLACK = 1e-6
MINMAX_SLACK = 1e-4
OCCUPATION_SKIP = 0.0  # levels with occupation <= this carry no field weight


@dataclass(frozen=True)
class ObservableFields:
    """Grid fields of a state and their spacing-weighted integrals."""

    grid: GridSpec
    density: np.ndarray  # (npts,)
    current: np.ndarray  # (d, npts)
    kinetic: np.ndarray  # (npts,)
    total_energy_density: np.ndarray  # (npts,)
    half_density_gradient: np.ndarray  # (d, npts)
    sqrt_density_gradient: np.ndarray  # (d, npts)
    potential: np.ndarray  # (npts,)
    ground_energy: float

    @property
    def weight(self) -> float:
        return self.grid.spacing**self.grid.dimension

    @property
    def total_density(self) -> float:
        return self.weight * float(np.sum(self.density))

    @property
    def total_current(self) -> np.ndarray:
        return self.weight * np.sum(self.current, axis=1)

    @property
    def total_kinetic(self) -> float:
        return self.weight * float(np.sum(self.kinetic))

    @property
    def total_energy(self) -> float:
        return self.weight * float(np.sum(self.total_energy_density))


def _gradient(flat: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Per-axis gradient of a flattened grid function, shape (d, npts)."""
    h = grid.spacing
    if grid.dimension == 1:
        return np.gradient(flat, h)[None, :]
    n = grid.points_per_axis
    cube = flat.reshape(n, n)
    gx, gy = np.gradient(cube, h)
    return np.stack([gx.ravel(), gy.ravel()])


def _base_fields(ham: SpectralHamiltonian, occupations: np.ndarray, phase: np.ndarray | None):
    """Accumulate n, u, k, R over occupied levels.

    When ``phase`` (the wavevector of a lazily stored transform) is
    given, each eigenfunction is multiplied by exp(i b.x) and its
    gradient formed by the exact product rule, which only discretizes
    the base function's derivative.
    """
    grid = ham.grid
    npts = grid.total_points
    d = grid.dimension
    density = np.zeros(npts)
    kinetic = np.zeros(npts)
    cross = np.zeros((d, npts), dtype=complex)
    coords = _coordinates(grid)
    for j in np.nonzero(occupations > OCCUPATION_SKIP)[0]:
        nu = occupations[j]
        psi = ham.eigenvectors[:, j]
        grad = _gradient(psi, grid).astype(complex)
        psi = psi.astype(complex)
        if phase is not None:
            factor = np.exp(1j * np.tensordot(phase, coords, axes=(0, 0)))
            grad = factor[None, :] * (grad + 1j * phase[:, None] * psi[None, :])
            psi = factor * psi
        density += nu * np.abs(psi) ** 2
        kinetic += nu * np.sum(np.abs(grad) ** 2, axis=0)
        cross += nu * np.conj(psi)[None, :] * grad
    return density, kinetic, cross.real, cross.imag


def _coordinates(grid: GridSpec) -> np.ndarray:
    x = grid.axis
    if grid.dimension == 1:
        return x[None, :]
    xx, yy = np.meshgrid(x, x, indexing="ij")
    return np.stack([xx.ravel(), yy.ravel()])


def _assemble(ham, density, kinetic, half_grad, current) -> ObservableFields:
    v = ham.potential_values()
    mask = density > DENSITY_FLOOR
    sqrt_grad = np.zeros_like(half_grad)
    sqrt_grad[:, mask] = half_grad[:, mask] / np.sqrt(density[mask])
    return ObservableFields(
        grid=ham.grid,
        density=density,
        current=current,
        kinetic=kinetic,
        total_energy_density=kinetic + v * density,
        half_density_gradient=half_grad,
        sqrt_density_gradient=sqrt_grad,
        potential=v,
        ground_energy=ham.ground_energy,
    )


def compute_fields(state) -> ObservableFields:
    """Local fields of a state (duck-typed: spectrum, occupations, gauge).

    A lazily stored phase wavevector is folded in through the
    closed-form transformed fields.
    """
    ham = state.spectrum
    occupations = np.asarray(state.occupations, dtype=float)
    density, kinetic, half_grad, current = _base_fields(ham, occupations, phase=None)
    fields = _assemble(ham, density, kinetic, half_grad, current)
    gauge = getattr(state, "gauge", None)
    if gauge is not None:
        fields = transform_fields(fields, gauge)
    return fields


def compute_fields_materialized(state) -> ObservableFields:
    """Fields from the explicitly phased eigenfunctions.

    Independent cross-check path for transformed states; agrees with
    compute_fields up to roundoff.
    """
    ham = state.spectrum
    occupations = np.asarray(state.occupations, dtype=float)
    gauge = getattr(state, "gauge", None)
    phase = None if gauge is None else np.atleast_1d(np.asarray(gauge, dtype=float))
    density, kinetic, half_grad, current = _base_fields(ham, occupations, phase=phase)
    return _assemble(ham, density, kinetic, half_grad, current)


def gauge_transform(state, wavevector):
    """Attach the phase transform e^{i b.x} to a state (lazy).

    Occupations, and hence the entropy, are unchanged.  Repeated
    transforms accumulate additively in the stored wavevector.
    """
    b = np.atleast_1d(np.asarray(wavevector, dtype=float))
    if b.size != state.spectrum.grid.dimension:
        raise ValueError("wavevector must have one component per dimension")
    previous = getattr(state, "gauge", None)
    if previous is not None:
        b = b + np.atleast_1d(np.asarray(previous, dtype=float))
    return replace(state, gauge=b)


def transform_fields(fields: ObservableFields, wavevector) -> ObservableFields:
    """Closed-form fields of the phase-transformed state.

    n' = n, u' = u + n b, k' = k + 2 b.u + |b|^2 n, and the total energy
    density shifts by the same kinetic amount.  The square-root density
    gradient is unchanged.
    """
    b = np.atleast_1d(np.asarray(wavevector, dtype=float))
    if b.size != fields.grid.dimension:
        raise ValueError("wavevector must have one component per dimension")
    b_dot_u = np.tensordot(b, fields.current, axes=(0, 0))
    bsq = float(np.dot(b, b))
    kinetic = fields.kinetic + 2.0 * b_dot_u + bsq * fields.density
    return replace(
        fields,
        current=fields.current + fields.density[None, :] * b[:, None],
        kinetic=kinetic,
        total_energy_density=fields.total_energy_density + 2.0 * b_dot_u + bsq * fields.density,
    )


@dataclass(frozen=True)
class AdmissibilityReport:
    """Pointwise and integrated compatibility checks on observable fields."""

    compat_max_violation: float
    compat_ok: bool
    minmax_lhs: float
    minmax_rhs: float
    minmax_ok: bool
    cauchy_schwarz_lhs: float
    cauchy_schwarz_rhs: float
    cauchy_schwarz_ok: bool
    gradient_identity_deviation: float
    gradient_identity_ok: bool

    @property
    def all_ok(self) -> bool:
        return self.compat_ok and self.minmax_ok and self.cauchy_schwarz_ok and self.gradient_identity_ok


def admissibility_check(fields: ObservableFields) -> AdmissibilityReport:
    """Check the bounds any physical state's fields must satisfy.

    Pointwise: k >= |u|^2/n + |grad sqrt(n)|^2 wherever the density is
    above the floor, within slack 1e-6 (1 + k).  Integrated: the ground
    energy bound lambda_0 int n <= int |grad sqrt n|^2 + int V n, and
    the Cauchy-Schwarz bound |int u|^2 / int n <= int |u|^2 / n.  Also
    verifies grad n / 2 against the accumulated half density gradient.
    """
    n = fields.density
    mask = n > DENSITY_FLOOR
    u_sq = np.sum(fields.current**2, axis=0)
    gs_sq = np.sum(fields.sqrt_density_gradient**2, axis=0)
    lhs = fields.kinetic[mask]
    rhs = u_sq[mask] / n[mask] + gs_sq[mask]
    violation = float(np.max(rhs - lhs, initial=0.0))
    compat_ok = bool(np.all(rhs - lhs <= COMPAT_SLACK * (1.0 + lhs)))

    w = fields.weight
    minmax_lhs = fields.ground_energy * fields.total_density
    minmax_rhs = w * float(np.sum(gs_sq)) + w * float(np.sum(fields.potential * n))
    minmax_ok = minmax_lhs <= minmax_rhs + MINMAX_SLACK * (1.0 + abs(minmax_lhs))

    total_u = fields.total_current
    cs_lhs = float(np.dot(total_u, total_u)) / fields.total_density
    cs_rhs = w * float(np.sum(u_sq[mask] / n[mask]))
    cs_ok = cs_lhs <= cs_rhs + 1e-9 * (1.0 + abs(cs_rhs))

    grad_n = _gradient(n, fields.grid)
    dev = float(np.max(np.abs(0.5 * grad_n - fields.half_density_gradient)))
    scale = 1.0 + float(np.max(np.abs(fields.half_density_gradient)))
    grad_ok = dev <= 1e-3 * scale

    return AdmissibilityReport(
        compat_max_violation=violation,
        compat_ok=compat_ok,
        minmax_lhs=minmax_lhs,
        minmax_rhs=minmax_rhs,
        minmax_ok=minmax_ok,
        cauchy_schwarz_lhs=cs_lhs,
        cauchy_schwarz_rhs=cs_rhs,
        cauchy_schwarz_ok=cs_ok,
        gradient_identity_deviation=dev,
        gradient_identity_ok=grad_ok,
    )
