"""Convex entropy densities and their inverse occupation maps.

Each model packages a strictly convex density s(x) on [0, n_cap] with
s(0) = 0, its first two derivatives, the derivative limits at both
endpoints of the domain, and the inverse map

    occupation(t) = (s')^{-1}(-t),

extended by the cap value below its domain and by 0 above it.  The
catalogue covers the classical occupation statistics:

    boltzmann       s(x) = x log x - x            occupation(t) = e^{-t}
    fermi_dirac     s(x) = x log x + (1-x)log(1-x)  1 / (e^t + 1)
    bose_einstein   s(x) = x log x - (1+x)log(1+x)  1 / (e^t - 1)
    tsallis(q)      s(x) = x^q / (q-1)            ((q-1)(-t)/q)^{1/(q-1)}

plus a "custom" escape hatch whose inverse map falls back to safeguarded
bisection.  Derivative endpoint classification is computed from the
limits themselves, never from the model name, because the algorithms
branch on finite versus infinite endpoints (finite derivative at zero
means finite-rank equilibrium states; a finite derivative at the cap
pins the chemical potential at low temperature).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import xlogy

from .errors import ModelValidationError

ROUND_TRIP_RTOL = 1e-10
CUSTOM_BISECTION_TOL = 1e-12
GROWTH_SAFETY = 1.01  # inflation of the sampled growth supremum

_CATALOGUE = ("boltzmann", "fermi_dirac", "bose_einstein", "tsallis", "custom")


@dataclass(frozen=True)
class ExtendedReal:
    """Tagged extended real: finite value, +infinity or -infinity."""

    kind: str  # "finite" | "+inf" | "-inf"
    value: float = 0.0

    @classmethod
    def finite(cls, value: float) -> "ExtendedReal":
        return cls("finite", float(value))

    @classmethod
    def pos_inf(cls) -> "ExtendedReal":
        return cls("+inf")

    @classmethod
    def neg_inf(cls) -> "ExtendedReal":
        return cls("-inf")

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"

    def to_float(self) -> float:
        if self.kind == "+inf":
            return math.inf
        if self.kind == "-inf":
            return -math.inf
        return self.value

    def __repr__(self) -> str:
        return self.kind if not self.is_finite else f"{self.value!r}"


def _classify_limit(deriv: Callable, endpoint: float, approach_from: float) -> ExtendedReal:
    """Derivative limit at a domain endpoint, classified numerically."""
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        at_end = float(np.asarray(deriv(np.array([endpoint])))[0])
    if math.isfinite(at_end):
        return ExtendedReal.finite(at_end)
    # Walk a geometric approach sequence and read off the trend sign.
    steps = endpoint + (approach_from - endpoint) * 2.0 ** -np.arange(8, 44, 4.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        vals = np.asarray(deriv(steps), dtype=float)
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        raise ModelValidationError("cannot classify derivative limit: no finite samples")
    return ExtendedReal.pos_inf() if vals[-1] > 0 else ExtendedReal.neg_inf()


@dataclass(frozen=True)
class EntropyModel:
    """A convex entropy density with its inverse occupation map.

    The instance is immutable after construction and safe to share
    between sweep workers.
    """

    name: str
    trace_cap: float
    entropy_density: Callable
    entropy_deriv: Callable
    entropy_second: Callable
    deriv_limit_zero: ExtendedReal
    deriv_limit_cap: ExtendedReal
    occupation_raw: Callable
    occupation_prime_raw: Callable
    growth_exponent: float
    holder_exponent: float | None
    growth_constant: float
    growth_ref: float
    holder_ref: float
    params: dict = field(default_factory=dict)

    # -- domain of the inverse map -------------------------------------
    @property
    def domain_lo(self) -> float:
        """Lower endpoint -s'(cap) of the occupation-map domain."""
        return -self.deriv_limit_cap.to_float()

    @property
    def domain_hi(self) -> float:
        """Upper endpoint -s'(0) of the occupation-map domain."""
        return -self.deriv_limit_zero.to_float()

    @property
    def finite_rank(self) -> bool:
        """True when the derivative limit at zero is finite."""
        return self.deriv_limit_zero.is_finite

    def occupation(self, t):
        """Inverse map (s')^{-1}(-t), extended to all reals by clamping."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.empty_like(t)
        below = t <= self.domain_lo
        above = t >= self.domain_hi
        mid = ~(below | above)
        out[below] = self.trace_cap
        out[above] = 0.0
        if np.any(mid):
            out[mid] = self.occupation_raw(t[mid])
        return float(out[0]) if scalar else out

    def occupation_prime(self, t):
        """Derivative of the inverse map; 0 outside the open domain."""
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        t = np.atleast_1d(t)
        out = np.zeros_like(t)
        mid = (t > self.domain_lo) & (t < self.domain_hi)
        if np.any(mid):
            out[mid] = self.occupation_prime_raw(t[mid])
        return float(out[0]) if scalar else out

    def thermal_occupation(self, temperature: float, x):
        """Occupation at temperature T: occupation(x / T)."""
        if temperature <= 0.0:
            raise ValueError("temperature must be positive")
        return self.occupation(np.asarray(x, dtype=float) / temperature)

    def thermal_occupation_prime(self, temperature: float, x):
        """occupation'(x / T); note no inner 1/T factor is applied."""
        if temperature <= 0.0:
            raise ValueError("temperature must be positive")
        return self.occupation_prime(np.asarray(x, dtype=float) / temperature)


# ---------------------------------------------------------------------------
# catalogue builders
# ---------------------------------------------------------------------------


def _boltzmann(n_cap: float):
    def density(x):
        x = np.asarray(x, dtype=float)
        return xlogy(x, x) - x

    def deriv(x):
        with np.errstate(divide="ignore"):
            return np.log(np.asarray(x, dtype=float))

    def second(x):
        return 1.0 / np.asarray(x, dtype=float)

    def occ(t):
        # t is bounded below by -log(cap) on the domain, so no overflow
        return np.exp(-np.asarray(t, dtype=float))

    def occ_prime(t):
        return -np.exp(-np.asarray(t, dtype=float))

    return density, deriv, second, occ, occ_prime, None


def _fermi_dirac(n_cap: float):
    if n_cap > 1.0 + 1e-12:
        raise ModelValidationError("fermi_dirac requires n_cap <= 1")

    def density(x):
        x = np.asarray(x, dtype=float)
        return xlogy(x, x) + xlogy(1.0 - x, 1.0 - x)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(x) - np.log1p(-x)

    def second(x):
        x = np.asarray(x, dtype=float)
        return 1.0 / (x * (1.0 - x))

    def occ(t):
        # overflow of exp saturates the limits 0 and 1 correctly
        with np.errstate(over="ignore"):
            return 1.0 / (np.exp(np.asarray(t, dtype=float)) + 1.0)

    def occ_prime(t):
        f = occ(t)
        return -f * (1.0 - f)

    return density, deriv, second, occ, occ_prime, None


def _bose_einstein(n_cap: float):
    def density(x):
        x = np.asarray(x, dtype=float)
        return xlogy(x, x) - xlogy(1.0 + x, 1.0 + x)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return np.log(x) - np.log1p(x)

    def second(x):
        x = np.asarray(x, dtype=float)
        return 1.0 / (x * (1.0 + x))

    def occ(t):
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(np.asarray(t, dtype=float))

    def occ_prime(t):
        f = occ(t)
        return -f * (1.0 + f)

    return density, deriv, second, occ, occ_prime, None


def _tsallis(n_cap: float, q: float):
    if not (0.0 < q and q != 1.0):
        raise ModelValidationError("tsallis requires q in (0,1) or (1,inf)")
    coeff = q / (q - 1.0)

    def density(x):
        x = np.asarray(x, dtype=float)
        return x**q / (q - 1.0)

    def deriv(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            return coeff * x ** (q - 1.0)

    def second(x):
        x = np.asarray(x, dtype=float)
        return q * x ** (q - 2.0)

    def occ(t):
        arg = np.maximum((q - 1.0) * (-np.asarray(t, dtype=float)) / q, 0.0)
        return arg ** (1.0 / (q - 1.0))

    def occ_prime(t):
        # occupation'(t) = -1 / s''(occupation(t)) = -occ^{2-q} / q
        return -occ(t) ** (2.0 - q) / q

    holder = q - 1.0 if q > 1.0 else None
    return density, deriv, second, occ, occ_prime, holder


def _custom(n_cap: float, params: dict):
    density = params.get("entropy_density")
    deriv = params.get("entropy_deriv")
    if density is None or deriv is None:
        raise ModelValidationError(
            "custom model needs 'entropy_density' and 'entropy_deriv' callables"
        )
    second = params.get("entropy_second")
    if second is None:

        def second(x, _d=deriv):
            x = np.asarray(x, dtype=float)
            h = 1e-6 * np.maximum(np.abs(x), 1e-6)
            return (np.asarray(_d(x + h)) - np.asarray(_d(x - h))) / (2.0 * h)

    def occ_scalar(t: float) -> float:
        # Safeguarded bisection for s'(x) = -t on (0, n_cap).
        lo, hi = 1e-300, n_cap * (1.0 - 1e-16)
        f_lo = float(np.asarray(deriv(np.array([lo])))[0]) + t
        f_hi = float(np.asarray(deriv(np.array([hi])))[0]) + t
        if f_lo >= 0.0:
            return 0.0
        if f_hi <= 0.0:
            return n_cap
        for _ in range(300):
            mid = 0.5 * (lo + hi)
            f_mid = float(np.asarray(deriv(np.array([mid])))[0]) + t
            if abs(f_mid) <= CUSTOM_BISECTION_TOL or hi - lo <= CUSTOM_BISECTION_TOL * n_cap:
                return mid
            if f_mid < 0.0:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    occ = np.vectorize(occ_scalar, otypes=[float])

    def occ_prime(t):
        vals = occ(t)
        return -1.0 / np.asarray(second(vals), dtype=float)

    holder = params.get("holder_exponent")
    return density, deriv, second, occ, occ_prime, holder


# ---------------------------------------------------------------------------
# constructor and growth validation
# ---------------------------------------------------------------------------


def _sampled_growth_constant(deriv, gamma: float, x_ref: float) -> float:
    """sup of x^{1-gamma} |s'(x)| over (0, x_ref], sampled log-uniformly."""
    x = np.geomspace(x_ref * 1e-58, x_ref, 4000)
    with np.errstate(divide="ignore", over="ignore"):
        vals = x ** (1.0 - gamma) * np.abs(np.asarray(deriv(x), dtype=float))
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        raise ModelValidationError("growth supremum could not be sampled")
    return GROWTH_SAFETY * float(np.max(vals))


def make_model(name: str, n_bar: float, params: dict | None = None) -> EntropyModel:
    """Build a catalogue (or custom) entropy model with trace cap n_bar.

    Parameters
    ----------
    name : str
        One of boltzmann, fermi_dirac, bose_einstein, tsallis, custom.
    n_bar : float
        Positive trace cap; equals the total trace constraint.
    params : dict, optional
        tsallis needs ``q``; ``gamma`` overrides the default growth
        exponent 0.9; custom models pass their callables here.
    """
    params = dict(params or {})
    if n_bar <= 0.0:
        raise ModelValidationError("n_bar must be positive")
    if name not in _CATALOGUE:
        raise ModelValidationError(f"unknown entropy model '{name}'")

    if name == "boltzmann":
        pieces = _boltzmann(n_bar)
    elif name == "fermi_dirac":
        pieces = _fermi_dirac(n_bar)
    elif name == "bose_einstein":
        pieces = _bose_einstein(n_bar)
    elif name == "tsallis":
        if "q" not in params:
            raise ModelValidationError("tsallis model needs parameter 'q'")
        pieces = _tsallis(n_bar, float(params["q"]))
    else:
        pieces = _custom(n_bar, params)

    density, deriv, second, occ, occ_prime, holder = pieces
    gamma = float(params.get("gamma", 0.9))
    if not (0.0 < gamma < 1.0):
        raise ModelValidationError("gamma must lie in (0, 1)")

    limit_zero = _classify_limit(deriv, 0.0, n_bar / 2.0)
    limit_cap = _classify_limit(deriv, n_bar, n_bar / 2.0)
    if holder is not None and not limit_zero.is_finite:
        raise ModelValidationError(
            "a Holder exponent is only meaningful when the derivative "
            "limit at zero is finite"
        )

    # Reference point for the growth bound; shrink until s' is negative
    # there so the inverse-map majorant has a positive domain threshold.
    x_ref = n_bar / 2.0
    for _ in range(200):
        val = float(np.asarray(deriv(np.array([x_ref])))[0])
        if val < -1e-3:
            break
        x_ref *= 0.5
    growth_constant = _sampled_growth_constant(deriv, gamma, x_ref)

    return EntropyModel(
        name=name,
        trace_cap=float(n_bar),
        entropy_density=density,
        entropy_deriv=deriv,
        entropy_second=second,
        deriv_limit_zero=limit_zero,
        deriv_limit_cap=limit_cap,
        occupation_raw=occ,
        occupation_prime_raw=occ_prime,
        growth_exponent=gamma,
        holder_exponent=None if holder is None else float(holder),
        growth_constant=growth_constant,
        growth_ref=x_ref,
        holder_ref=n_bar / 2.0,
        params=params,
    )


@dataclass(frozen=True)
class GrowthReport:
    """Outcome of the growth-condition validation of a model."""

    model_name: str
    gamma: float
    dimension: int
    x_ref: float
    polynomial_sup: float
    holder_exponent: float | None
    holder_lower: float | None
    holder_upper: float | None
    occupation_bound_ok: bool


def validate_growth(
    model: EntropyModel,
    sample_count: int = 2000,
    dimension: int = 1,
    x_ref: float | None = None,
    holder_ref: float | None = None,
) -> GrowthReport:
    """Check the slow-blowup and Holder conditions on the density derivative.

    Verifies that gamma lies in (d/(d+2), 1), that
    sup x^{1-gamma} |s'(x)| is finite on (0, x_ref], and, for models with
    a finite derivative at zero, fits constants c_minus, c_plus with
    c_minus x^r <= s'(x) - s'(0) <= c_plus x^r on (0, holder_ref].
    Models with an infinite derivative at zero also get the induced
    power-law bound on the occupation map checked on sampled arguments.

    Raises ModelValidationError when a condition fails.
    """
    gamma = model.growth_exponent
    lower = dimension / (dimension + 2.0)
    if not (lower < gamma < 1.0):
        raise ModelValidationError(
            f"growth exponent {gamma} outside admissible interval "
            f"({lower}, 1) for dimension {dimension}"
        )
    x_ref = model.growth_ref if x_ref is None else float(x_ref)
    holder_ref = model.holder_ref if holder_ref is None else float(holder_ref)

    x = np.geomspace(x_ref * 1e-58, x_ref, sample_count)
    with np.errstate(divide="ignore", over="ignore"):
        weighted = x ** (1.0 - gamma) * np.abs(np.asarray(model.entropy_deriv(x), dtype=float))
    finite = weighted[np.isfinite(weighted)]
    if finite.size < sample_count // 2:
        raise ModelValidationError("density derivative not evaluable on the sample grid")
    sup = float(np.max(finite))
    # Divergence screen: per-decade maxima must not keep growing toward 0.
    decades = np.array_split(finite, 12)
    per_dec = np.array([np.max(d) for d in decades if d.size])
    if per_dec.size >= 4:
        head = per_dec[:4]
        if np.all(np.diff(head) < 0.0) and head[0] > 1e3 * per_dec[-1]:
            raise ModelValidationError(
                f"x^(1-gamma)|s'(x)| grows without bound toward 0 "
                f"(sampled sup {sup:.3e}); growth condition violated"
            )

    c_minus = c_plus = None
    if model.finite_rank:
        if model.holder_exponent is None:
            raise ModelValidationError(
                "finite derivative at zero requires a Holder exponent"
            )
        r = model.holder_exponent
        xs = np.geomspace(holder_ref * 1e-10, holder_ref, sample_count)
        shifted = np.asarray(model.entropy_deriv(xs), dtype=float) - model.deriv_limit_zero.value
        ratios = shifted / xs**r
        ratios = ratios[np.isfinite(ratios)]
        if ratios.size == 0 or np.min(ratios) <= 0.0:
            raise ModelValidationError("Holder lower bound is not positive on the window")
        c_minus = float(np.min(ratios))
        c_plus = float(np.max(ratios))

    occupation_ok = True
    if not model.finite_rank:
        t0 = -float(np.asarray(model.entropy_deriv(np.array([x_ref])))[0])
        ts = np.geomspace(max(t0, 1e-8), max(t0, 1e-8) * 1e12, 400)
        bound = model.growth_constant ** (1.0 / (1.0 - gamma)) * ts ** (-1.0 / (1.0 - gamma))
        occupation_ok = bool(np.all(model.occupation(ts) <= bound * (1.0 + 1e-9)))

    return GrowthReport(
        model_name=model.name,
        gamma=gamma,
        dimension=dimension,
        x_ref=x_ref,
        polynomial_sup=sup,
        holder_exponent=model.holder_exponent,
        holder_lower=c_minus,
        holder_upper=c_plus,
        occupation_bound_ok=occupation_ok,
    )
