"""Finite-difference discretization of confined Schrodinger operators.

The operator is -Laplacian + V with V(x) = offset + |x|^theta on the open
box (-L, L)^d with homogeneous Dirichlet boundary values, discretized by
second-order central differences.  In one dimension the matrix is
symmetric tridiagonal and solved by LAPACK bisection plus inverse
iteration; in two dimensions a sparse shift-invert Lanczos solver is
used with a fixed start vector so runs are reproducible.

Only eigenvalues below a tenth of the discrete Laplacian's spectral
width are retained ("trusted"): higher modes oscillate at the grid scale
and would silently corrupt spectral sums.  Operations refuse energy
arguments beyond the trusted range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import quad
from scipy.linalg import eigh_tridiagonal
from scipy.sparse.linalg import eigsh

from .errors import ConfigError, SolverError, UntrustedSpectrumError

TRUST_FRACTION = 0.1
ORTHONORMALITY_TOL = 1e-8
RESIDUAL_TOL = 1e-6
PHASE_THRESHOLD = 1e-8


@dataclass(frozen=True)
class GridSpec:
    """Uniform tensor grid on the open box (-L, L)^d, Dirichlet walls."""

    dimension: int
    half_width: float
    points_per_axis: int

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigError("dimension must be 1 or 2")
        if self.half_width <= 0.0:
            raise ConfigError("half_width must be positive")
        if self.points_per_axis < 3:
            raise ConfigError("points_per_axis must be at least 3")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.points_per_axis + 1)

    @property
    def axis(self) -> np.ndarray:
        """Interior grid points of one axis."""
        n = self.points_per_axis
        return -self.half_width + self.spacing * np.arange(1, n + 1)

    @property
    def total_points(self) -> int:
        return self.points_per_axis**self.dimension


@dataclass(frozen=True)
class PotentialSpec:
    """Radial confinement V(x) = offset + |x|^theta with offset fixed to 1."""

    theta: float
    offset: float = 1.0

    def __post_init__(self):
        if self.theta <= 0.0:
            raise ConfigError("theta must be positive")

    def values(self, grid: GridSpec) -> np.ndarray:
        x = grid.axis
        if grid.dimension == 1:
            r = np.abs(x)
        else:
            xx, yy = np.meshgrid(x, x, indexing="ij")
            r = np.sqrt(xx**2 + yy**2).ravel()
        return self.offset + r**self.theta


@dataclass(frozen=True)
class SpectralHamiltonian:
    """Trusted eigenpairs of the discretized operator.

    eigenvalues are nondecreasing; eigenvectors (columns) are
    orthonormal under the spacing-weighted inner product and have their
    first significant component positive.  Immutable after assembly.
    """

    grid: GridSpec
    potential: PotentialSpec
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # shape (total_points, size)
    trusted_cap: float
    requested_count: int

    @property
    def size(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def spectral_gap(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    @property
    def trusted_top(self) -> float:
        return float(self.eigenvalues[-1])

    def potential_values(self) -> np.ndarray:
        return self.potential.values(self.grid)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first component above threshold positive, per column."""
    scale = np.max(np.abs(vecs), axis=0)
    for j in range(vecs.shape[1]):
        nz = np.nonzero(np.abs(vecs[:, j]) > PHASE_THRESHOLD * scale[j])[0]
        if nz.size and vecs[nz[0], j] < 0.0:
            vecs[:, j] = -vecs[:, j]
    return vecs


def _verify(grid, vals, vecs, matvec):
    h = grid.spacing
    d = grid.dimension
    weight = h**d
    # h-weighted orthonormality (subsampled for very wide bases)
    k = vecs.shape[1]
    cols = np.arange(k) if k <= 600 else np.linspace(0, k - 1, 200).astype(int)
    sub = vecs[:, cols]
    gram = weight * (sub.T @ sub)
    dev = float(np.max(np.abs(gram - np.eye(cols.size))))
    if dev > ORTHONORMALITY_TOL:
        raise SolverError(f"eigenvector orthonormality defect {dev:.3e}")
    resid = matvec(vecs) - vecs * vals[None, :]
    rnorm = np.sqrt(weight * np.sum(resid**2, axis=0))
    if np.any(rnorm > RESIDUAL_TOL * vals):
        worst = float(np.max(rnorm / vals))
        raise SolverError(f"eigenpair residual {worst:.3e} exceeds tolerance")


def assemble_and_solve(
    grid: GridSpec,
    potential: PotentialSpec,
    count: int,
    verify: bool = True,
) -> SpectralHamiltonian:
    """Diagonalize the discrete operator and retain trusted eigenpairs.

    Returns the lowest ``count`` eigenpairs, truncated to those below
    the trusted cap.  Eigenvectors are normalized in the
    spacing-weighted inner product with a deterministic sign convention.
    """
    if count < 1:
        raise ConfigError("count must be at least 1")
    if count > grid.total_points:
        raise ConfigError(
            f"count {count} exceeds the {grid.total_points} grid degrees of freedom"
        )
    h = grid.spacing
    v = potential.values(grid)
    cap = TRUST_FRACTION * (4.0 * grid.dimension / h**2)

    if grid.dimension == 1:
        diag = 2.0 / h**2 + v
        off = np.full(grid.points_per_axis - 1, -1.0 / h**2)
        vals, vecs = eigh_tridiagonal(diag, off, select="i", select_range=(0, count - 1))

        def matvec(m):
            out = diag[:, None] * m
            out[:-1] += off[:, None] * m[1:]
            out[1:] += off[:, None] * m[:-1]
            return out

    else:
        n = grid.points_per_axis
        lap1 = sp.diags(
            [np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)],
            offsets=[-1, 0, 1],
            format="csr",
        ) / h**2
        eye = sp.identity(n, format="csr")
        a = sp.kron(lap1, eye) + sp.kron(eye, lap1) + sp.diags(v)
        a = a.tocsc()
        v0 = np.full(grid.total_points, 1.0 / np.sqrt(grid.total_points))
        vals, vecs = eigsh(a, k=count, sigma=0.0, which="LM", v0=v0)
        order = np.argsort(vals, kind="stable")
        vals, vecs = vals[order], vecs[:, order]

        def matvec(m):
            return a @ m

    keep = vals <= cap
    vals, vecs = vals[keep], vecs[:, keep]
    if vals.size == 0:
        raise SolverError("no eigenvalue below the trusted cap; refine the grid")
    vecs = _fix_phases(vecs / h ** (grid.dimension / 2.0))
    if vals.size >= 2 and vals[1] - vals[0] <= 0.0:
        raise SolverError("degenerate ground state: spectral gap is not positive")
    if vals[0] < potential.offset:
        raise SolverError("ground energy below the potential floor")
    if verify:
        _verify(grid, vals, vecs, matvec)
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralHamiltonian(
        grid=grid,
        potential=potential,
        eigenvalues=vals,
        eigenvectors=vecs,
        trusted_cap=cap,
        requested_count=count,
    )


def _require_trusted(ham: SpectralHamiltonian, energy: float) -> None:
    if energy > ham.trusted_top:
        raise UntrustedSpectrumError(
            f"energy {energy} exceeds the trusted spectrum top "
            f"{ham.trusted_top}; request a larger eigenpair count or a "
            f"finer/larger grid"
        )


def counting_function(ham: SpectralHamiltonian, energy: float) -> int:
    """Number of eigenvalues <= energy within the trusted spectrum."""
    _require_trusted(ham, energy)
    return int(np.searchsorted(ham.eigenvalues, energy, side="right"))


def riesz_mean(ham: SpectralHamiltonian, energy: float, order: float) -> float:
    """Smoothed eigenvalue count: sum of (energy - eigenvalue)_+^order."""
    if order <= 0.0:
        raise ValueError("order must be positive")
    _require_trusted(ham, energy)
    gaps = np.clip(energy - ham.eigenvalues, 0.0, None)
    return float(np.sum(gaps**order))


# ---------------------------------------------------------------------------
# counting upper bound for truncation-tail certificates
# ---------------------------------------------------------------------------


def counting_upper_bound(potential: PotentialSpec, dimension: int, energy):
    """Rigorous upper bound on the continuum counting function.

    Obtained by Neumann bracketing on a box of half width
    (E - offset)^(1/theta): outside the box the potential already
    exceeds E, inside it the Neumann Laplacian modes are counted
    explicitly.  Valid for every E; returns 0 below the potential floor.
    """
    e = np.asarray(energy, dtype=float)
    shifted = np.clip(e - potential.offset, 0.0, None)
    p = 0.5 + 1.0 / potential.theta
    rho = (2.0 / np.pi) * shifted**p
    if dimension == 1:
        return 1.0 + rho
    return (np.pi / 4.0) * (rho + np.sqrt(2.0)) ** 2


def counting_upper_bound_prime(potential: PotentialSpec, dimension: int, energy):
    """Derivative in E of counting_upper_bound (for integral tests)."""
    e = np.asarray(energy, dtype=float)
    shifted = np.clip(e - potential.offset, 0.0, None)
    p = 0.5 + 1.0 / potential.theta
    with np.errstate(divide="ignore", invalid="ignore"):
        rho_prime = (2.0 / np.pi) * p * shifted ** (p - 1.0)
    rho_prime = np.where(shifted > 0.0, rho_prime, 0.0)
    if dimension == 1:
        return rho_prime
    rho = (2.0 / np.pi) * shifted**p
    return (np.pi / 2.0) * (rho + np.sqrt(2.0)) * rho_prime


def spectral_tail_bound(
    ham: SpectralHamiltonian,
    majorant,
    threshold: float | None = None,
) -> float:
    """Bound sum of f(lambda_j) over continuum eigenvalues above threshold.

    ``majorant`` must be a nonincreasing nonnegative upper bound for the
    summand, decaying fast enough that f * counting_upper_bound -> 0.
    The bound is f(T) N_up(T) + integral_T^inf f(y) N_up'(y) dy, by
    summation by parts against the bracketing counting bound.
    """
    top = ham.trusted_top if threshold is None else float(threshold)

    def integrand(y):
        return float(majorant(y)) * float(
            counting_upper_bound_prime(ham.potential, ham.grid.dimension, y)
        )

    tail_int, abserr = quad(integrand, top, np.inf, limit=200)
    head = float(majorant(top)) * float(
        counting_upper_bound(ham.potential, ham.grid.dimension, top)
    )
    return head + tail_int + abserr
