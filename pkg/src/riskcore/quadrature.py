"""Adaptive Simpson quadrature with an absolute tolerance and a hard
evaluation budget. Exact primitives always take precedence over this
routine; it is the fallback integrator for everything without one."""

from __future__ import annotations

import math
from typing import Callable, Sequence

from .errors import QuadratureFailure

DEFAULT_TOL = 1e-10
DEFAULT_MAX_EVALS = 10**6


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = DEFAULT_TOL,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> float:
    """Integrate f over [a, b] to absolute tolerance tol.

    Classic recursive Simpson refinement with the |S2 - S1|/15 error
    estimate and Richardson extrapolation. Raises QuadratureFailure when
    the evaluation budget is exhausted before the tolerance is met.
    """
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol=tol, max_evals=max_evals)

    evals = 0

    def fev(x: float) -> float:
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise QuadratureFailure(
                f"evaluation budget {max_evals} exhausted on [{a}, {b}]"
            )
        return f(x)

    def simpson(fl: float, fm: float, fr: float, h: float) -> float:
        return h / 6.0 * (fl + 4.0 * fm + fr)

    def recurse(
        lo: float, hi: float, fl: float, fm: float, fr: float,
        whole: float, eps: float,
    ) -> float:
        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = fev(lm)
        frm = fev(rm)
        left = simpson(fl, flm, fm, mid - lo)
        right = simpson(fm, frm, fr, hi - mid)
        delta = left + right - whole
        # interval too narrow to split further: accept the refined value
        if abs(delta) <= 15.0 * eps or lm <= lo or rm >= hi:
            return left + right + delta / 15.0
        half = 0.5 * eps
        return (
            recurse(lo, mid, fl, flm, fm, left, half)
            + recurse(mid, hi, fm, frm, fr, right, half)
        )

    fa, fmid, fb = fev(a), fev(0.5 * (a + b)), fev(b)
    for v in (fa, fmid, fb):
        if not math.isfinite(v):
            raise QuadratureFailure(f"non-finite integrand on [{a}, {b}]")
    whole = simpson(fa, fmid, fb, b - a)
    return recurse(a, b, fa, fmid, fb, whole, tol)


def integrate_piecewise(
    f: Callable[[float], float],
    a: float,
    b: float,
    breakpoints: Sequence[float] = (),
    tol: float = DEFAULT_TOL,
    max_evals: int = DEFAULT_MAX_EVALS,
) -> float:
    """Integrate f over [a, b], splitting at interior breakpoints so the
    adaptive routine never straddles a known kink or jump."""
    cuts = sorted({a, b, *(t for t in breakpoints if a < t < b)})
    pieces = len(cuts) - 1
    if pieces <= 0:
        return 0.0
    piece_tol = tol / pieces
    return sum(
        adaptive_simpson(f, lo, hi, tol=piece_tol, max_evals=max_evals)
        for lo, hi in zip(cuts[:-1], cuts[1:])
    )
