"""Spectra: bounded non-increasing densities on [0, 1] with unit mass,
their primitives, canonical discretisation into L-estimator weights, and
the step-function view of a weight vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import WeightVector
from .errors import DomainError, NotMonotone, NotNormalised
from .quadrature import adaptive_simpson

#: grid resolution used to validate (S1)-(S3) at construction
VALIDATION_GRID = 10_000
#: tolerance for the non-increasing and unit-mass checks
SHAPE_TOL = 1e-12

Floats = Union[float, np.ndarray]


@dataclass(frozen=True)
class Spectrum:
    """A risk spectrum: non-increasing density phi on (0, 1], unit integral.

    bound is the sup-norm C; lipschitz is the Lipschitz constant L where
    one exists (None for the expected-shortfall family, which jumps).
    breakpoints lists interior kinks/jumps so quadrature never straddles
    them. An exact primitive is attached for every built-in kind; the
    adaptive fallback exists for custom densities only.
    """

    kind: str
    params: dict
    bound: float
    lipschitz: Optional[float]
    breakpoints: tuple
    _density: Callable[[np.ndarray], np.ndarray]
    _primitive: Optional[Callable[[np.ndarray], np.ndarray]]

    def __init__(
        self,
        kind: str,
        params: dict,
        bound: float,
        lipschitz: Optional[float],
        density: Callable[[np.ndarray], np.ndarray],
        primitive: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        breakpoints: Sequence[float] = (),
    ):
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "params", dict(params))
        object.__setattr__(self, "bound", float(bound))
        object.__setattr__(
            self, "lipschitz", None if lipschitz is None else float(lipschitz)
        )
        object.__setattr__(self, "breakpoints", tuple(breakpoints))
        object.__setattr__(self, "_density", density)
        object.__setattr__(self, "_primitive", primitive)
        self._validate()

    def _validate(self) -> None:
        grid = np.arange(1, VALIDATION_GRID + 1) / VALIDATION_GRID
        pts = np.union1d(grid, [t for t in self.breakpoints if 0 < t <= 1])
        vals = self._density(pts)
        if np.any(np.diff(vals) > SHAPE_TOL):
            raise NotMonotone(f"{self.kind} spectrum is not non-increasing")
        if np.any(vals < -SHAPE_TOL) or np.any(vals > self.bound + SHAPE_TOL):
            raise DomainError(
                f"{self.kind} spectrum leaves [0, {self.bound}] on the grid"
            )
        total = float(self.primitive(1.0))
        if abs(total - 1.0) > SHAPE_TOL:
            raise NotNormalised(f"{self.kind} spectrum integrates to {total}")

    def density(self, u: Floats) -> Floats:
        """Evaluate phi on (0, 1]."""
        arr = np.asarray(u, dtype=np.float64)
        if np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise DomainError(f"spectrum evaluated outside (0, 1]: {u}")
        out = self._density(arr)
        return float(out) if np.isscalar(u) or arr.ndim == 0 else out

    def primitive(self, t: Floats) -> Floats:
        """Evaluate Phi(t) = integral of phi over [0, t] for t in [0, 1]."""
        arr = np.asarray(t, dtype=np.float64)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError(f"primitive evaluated outside [0, 1]: {t}")
        if self._primitive is not None:
            out = self._primitive(arr)
        else:
            out = self._primitive_by_quadrature(arr)
        return float(out) if np.isscalar(t) or arr.ndim == 0 else out

    def _primitive_by_quadrature(self, arr: np.ndarray) -> np.ndarray:
        # evaluation floor keeps the open-domain density defined; the
        # truncation error is below C * 1e-12, under the 1e-10 tolerance
        def f(u: float) -> float:
            return float(self._density(np.asarray(max(u, 1e-12))))

        def one(t: float) -> float:
            if t == 0.0:
                return 0.0
            cuts = [0.0, *(b for b in self.breakpoints if 0 < b < t), t]
            return sum(
                adaptive_simpson(f, lo, hi, tol=1e-10 / max(1, len(cuts) - 1))
                for lo, hi in zip(cuts[:-1], cuts[1:])
            )

        return np.array([one(float(t)) for t in np.atleast_1d(arr)]).reshape(
            arr.shape
        )


def expected_shortfall_spectrum(alpha: float) -> Spectrum:
    """phi = (1/alpha) on (0, alpha], 0 beyond. Bounded, not Lipschitz."""
    if not (0.0 < alpha <= 1.0):
        raise DomainError(f"es spectrum needs alpha in (0, 1], got {alpha}")
    return Spectrum(
        kind="es",
        params={"alpha": float(alpha)},
        bound=1.0 / alpha,
        lipschitz=None,
        density=lambda u: np.where(u <= alpha, 1.0 / alpha, 0.0),
        primitive=lambda t: np.minimum(t, alpha) / alpha,
        breakpoints=(alpha,),
    )


def uniform_spectrum() -> Spectrum:
    """phi = 1: the negative-mean risk functional."""
    return Spectrum(
        kind="uniform",
        params={},
        bound=1.0,
        lipschitz=0.0,
        density=lambda u: np.ones_like(u),
        primitive=lambda t: np.asarray(t, dtype=np.float64),
    )


def linear_spectrum(slope: float) -> Spectrum:
    """phi(u) = 1 + slope * (1/2 - u); slope in [0, 2] keeps phi >= 0."""
    if not (0.0 <= slope <= 2.0):
        raise DomainError(f"linear spectrum needs slope in [0, 2], got {slope}")
    s = float(slope)
    return Spectrum(
        kind="linear",
        params={"slope": s},
        bound=1.0 + 0.5 * s,
        lipschitz=s,
        density=lambda u: 1.0 + s * (0.5 - u),
        primitive=lambda t: t + 0.5 * s * t * (1.0 - t),
    )


def exponential_spectrum(k: float) -> Spectrum:
    """phi(u) = k exp(-k u) / (1 - exp(-k)); risk aversion grows with k."""
    if not (k > 0.0 and math.isfinite(k)):
        raise DomainError(f"exponential spectrum needs k > 0, got {k}")
    k = float(k)
    norm = 1.0 - math.exp(-k)
    return Spectrum(
        kind="exponential",
        params={"k": k},
        bound=k / norm,
        lipschitz=k * k / norm,
        density=lambda u: k * np.exp(-k * u) / norm,
        primitive=lambda t: (1.0 - np.exp(-k * np.asarray(t, dtype=np.float64)))
        / norm,
    )


def piecewise_linear_spectrum(knots: Sequence[Sequence[float]]) -> Spectrum:
    """Spectrum interpolating (t, value) knots from t=0 to t=1.

    Values must be nonnegative and non-increasing; masses within 1e-12 of
    1 are renormalised exactly, anything further off is rejected.
    """
    pts = np.asarray(knots, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise DomainError("piecewise_linear spectrum needs [[t, v], ...] knots")
    t, v = pts[:, 0], pts[:, 1]
    if t[0] != 0.0 or t[-1] != 1.0 or np.any(np.diff(t) <= 0.0):
        raise DomainError("knot positions must increase strictly from 0 to 1")
    if np.any(v < 0.0):
        raise DomainError("knot values must be nonnegative")
    if np.any(np.diff(v) > SHAPE_TOL):
        raise NotMonotone("knot values must be non-increasing")
    total = float(np.trapezoid(v, t))
    if abs(total - 1.0) > SHAPE_TOL:
        raise NotNormalised(f"piecewise_linear spectrum integrates to {total}")
    v = v / total
    slopes = np.diff(v) / np.diff(t)
    seg_mass = 0.5 * (v[:-1] + v[1:]) * np.diff(t)
    cum = np.concatenate([[0.0], np.cumsum(seg_mass)])
    cum[-1] = 1.0

    def density(u: np.ndarray) -> np.ndarray:
        return np.interp(u, t, v)

    def primitive(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        j = np.clip(np.searchsorted(t, x, side="right") - 1, 0, t.size - 2)
        dt = x - t[j]
        return cum[j] + v[j] * dt + 0.5 * slopes[j] * dt * dt

    return Spectrum(
        kind="piecewise_linear",
        params={"knots": [[float(a), float(b)] for a, b in zip(t, v)]},
        bound=float(v[0]),
        lipschitz=float(np.max(np.abs(slopes))) if slopes.size else 0.0,
        density=density,
        primitive=primitive,
        breakpoints=tuple(float(x) for x in t[1:-1]),
    )


@dataclass(frozen=True)
class StepSpectrum:
    """Step density taking the value n * a_i on ((i-1)/n, i/n]."""

    levels: np.ndarray

    def __init__(self, levels: Sequence[float]):
        arr = np.asarray(levels, dtype=np.float64).copy()
        if np.any(np.diff(arr) > SHAPE_TOL):
            raise NotMonotone("step levels must be non-increasing")
        mean = float(arr.mean())
        if abs(mean - 1.0) > SHAPE_TOL:
            raise NotNormalised(f"step levels average to {mean}, not 1")
        arr.setflags(write=False)
        object.__setattr__(self, "levels", arr)

    @property
    def n(self) -> int:
        return self.levels.size

    def density(self, u: Floats) -> Floats:
        arr = np.asarray(u, dtype=np.float64)
        if np.any(arr <= 0.0) or np.any(arr > 1.0):
            raise DomainError(f"step spectrum evaluated outside (0, 1]: {u}")
        idx = np.clip(np.ceil(arr * self.n).astype(int) - 1, 0, self.n - 1)
        out = self.levels[idx]
        return float(out) if np.isscalar(u) or arr.ndim == 0 else out

    def primitive(self, t: Floats) -> Floats:
        arr = np.asarray(t, dtype=np.float64)
        if np.any(arr < 0.0) or np.any(arr > 1.0):
            raise DomainError(f"step primitive evaluated outside [0, 1]: {t}")
        cum = np.concatenate([[0.0], np.cumsum(self.levels)]) / self.n
        k = np.clip(np.floor(arr * self.n).astype(int), 0, self.n - 1)
        out = cum[k] + (arr - k / self.n) * self.levels[k]
        out = np.where(arr >= 1.0, cum[-1], out)
        return float(out) if np.isscalar(t) or arr.ndim == 0 else out


def canonical_weights(phi: Spectrum, n: int) -> WeightVector:
    """Canonical discretisation a_i = Phi(i/n) - Phi((i-1)/n).

    Exact primitives are differenced directly; only custom spectra fall
    back to per-interval quadrature.
    """
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    grid = np.arange(n + 1, dtype=np.float64) / n
    if phi._primitive is not None:
        cum = phi.primitive(grid)
        w = np.diff(cum)
    else:
        def f(u: float) -> float:
            return float(phi._density(np.asarray(max(u, 1e-12))))

        w = np.empty(n)
        for i in range(n):
            w[i] = adaptive_simpson(f, grid[i], grid[i + 1], tol=1e-12)
    return WeightVector(np.clip(w, 0.0, None), monotone=True)


def step_spectrum(a: WeightVector) -> StepSpectrum:
    """Associated step function of a non-increasing weight vector."""
    if not a.monotone:
        raise NotMonotone("step_spectrum requires a certified monotone vector")
    return StepSpectrum(a.n * a.weights)


def primitive_gap(phi: Spectrum, n: int, grid_size: int) -> float:
    """Max gap between the canonical step primitive and the true primitive
    over the grid {j / grid_size}. The distribution-free consistency
    criterion asks exactly that this tends to 0 in n."""
    if grid_size < 2:
        raise DomainError(f"grid_size must be >= 2, got {grid_size}")
    step = step_spectrum(canonical_weights(phi, n))
    t = np.arange(grid_size + 1, dtype=np.float64) / grid_size
    return float(np.max(np.abs(step.primitive(t) - phi.primitive(t))))


def spectrum_from_json(obj: dict) -> Spectrum:
    """Build a spectrum from its JSON description."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise DomainError("spectrum JSON must be an object with a 'type' field")
    kind = obj["type"]
    try:
        if kind == "es":
            return expected_shortfall_spectrum(float(obj["alpha"]))
        if kind == "uniform":
            return uniform_spectrum()
        if kind == "linear":
            return linear_spectrum(float(obj["slope"]))
        if kind == "exponential":
            return exponential_spectrum(float(obj["k"]))
        if kind == "piecewise_linear":
            return piecewise_linear_spectrum(obj["knots"])
    except KeyError as exc:
        raise DomainError(f"spectrum JSON missing field {exc}") from exc
    raise DomainError(f"unknown spectrum type {kind!r}")


def spectrum_to_json(phi: Spectrum) -> dict:
    return {"type": phi.kind, **phi.params}
