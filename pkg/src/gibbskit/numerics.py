"""Scalar root finding and quadrature helpers used by the solvers.

Both routines control the *residual* rather than the argument: bisection
stops when |f(x) - target| is small enough, and the Simpson integrator
refines panels until the local error estimate passes a relative test.
"""

from __future__ import annotations

from typing import Callable

from .errors import SolverError

BISECTION_MAX_ITER = 200
SIMPSON_MAX_PANELS = 2**14


def bisect_residual(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    target: float,
    residual_tol: float,
    decreasing: bool = True,
    max_iter: int = BISECTION_MAX_ITER,
) -> float:
    """Bisection on a monotone f until |f(x) - target| <= residual_tol.

    The bracket must satisfy f(lo) >= target >= f(hi) for decreasing f
    (reversed for increasing f).  The tolerance is on the residual, not
    on the argument, so flat stretches near the endpoints are handled.
    """
    sign = 1.0 if decreasing else -1.0
    f_lo = f(lo)
    f_hi = f(hi)
    if abs(f_lo - target) <= residual_tol:
        return lo
    if abs(f_hi - target) <= residual_tol:
        return hi
    if sign * (f_lo - target) < 0.0 or sign * (target - f_hi) < 0.0:
        raise SolverError(
            f"bisection bracket does not straddle the target: "
            f"f({lo})={f_lo}, f({hi})={f_hi}, target={target}"
        )
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if abs(f_mid - target) <= residual_tol:
            return mid
        if sign * (f_mid - target) > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * max(1.0, abs(lo), abs(hi)):
            # Interval exhausted at double precision; accept the better end.
            f_lo, f_hi = f(lo), f(hi)
            best = lo if abs(f_lo - target) <= abs(f_hi - target) else hi
            if abs(f(best) - target) <= 1e3 * residual_tol:
                return best
            raise SolverError(
                "bisection interval collapsed before meeting the residual "
                f"tolerance {residual_tol}"
            )
    raise SolverError(f"bisection did not converge in {max_iter} iterations")


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    rel_tol: float = 1e-7,
    max_panels: int = SIMPSON_MAX_PANELS,
) -> float:
    """Adaptive composite Simpson integral of f over [a, b].

    Classic bisection refinement with the 1/15 Richardson error test.
    Raises SolverError once the panel budget is exhausted.
    """
    if a == b:
        return 0.0
    scale = None  # set after the first whole-interval estimate

    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    scale = max(1.0, abs(whole))
    budget = [max_panels]

    def recurse(a, m, b, fa, fm, fb, whole, tol, depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        budget[0] -= 2
        if budget[0] < 0:
            raise SolverError(
                f"adaptive Simpson exceeded {max_panels} panels "
                f"(rel_tol={rel_tol})"
            )
        err = left + right - whole
        if abs(err) <= 15.0 * tol or depth > 48:
            return left + right + err / 15.0
        return recurse(a, lm, m, fa, flm, fm, left, tol / 2.0, depth + 1) + recurse(
            m, rm, b, fm, frm, fb, right, tol / 2.0, depth + 1
        )

    return recurse(a, m, b, fa, fm, fb, whole, rel_tol * scale, 0)


def expand_bracket_down(
    f: Callable[[float], float],
    start: float,
    predicate: Callable[[float], bool],
    max_doublings: int = 60,
) -> float:
    """Walk downward from `start` by doubling steps until predicate(f(x)).

    Returns the first x found with predicate(f(x)) true.
    """
    x = start
    if predicate(f(x)):
        return x
    step = 1.0
    for _ in range(max_doublings):
        x -= step
        step *= 2.0
        if predicate(f(x)):
            return x
    raise SolverError("downward bracket expansion failed")


def expand_bracket_up(
    f: Callable[[float], float],
    start: float,
    predicate: Callable[[float], bool],
    max_doublings: int = 60,
) -> float:
    """Walk upward from `start` by doubling steps until predicate(f(x))."""
    x = start
    if predicate(f(x)):
        return x
    step = 1.0
    for _ in range(max_doublings):
        x += step
        step *= 2.0
        if predicate(f(x)):
            return x
    raise SolverError("upward bracket expansion failed")
