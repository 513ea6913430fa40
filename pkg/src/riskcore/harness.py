"""Experiment drivers: randomized coherence-axiom verification and the
consistency / rate / CLT / bootstrap diagnostics, all reproducible from
(config, seed) and independent of the worker count."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .asymptotics import (
    RngSpec,
    asymptotic_variance,
    bootstrap_distribution,
    indexed_map,
    kolmogorov_distance,
    truncated_kolmogorov,
)
from .core import RepresentingSet, Sample
from .errors import (
    DegenerateFit,
    DegenerateVariance,
    DomainError,
    NotLipschitz,
    OracleFailure,
)
from .estimators import discrete_es_profile, kusuoka_plugin
from .population import (
    ReferenceDistribution,
    distribution_to_json,
    population_spectral_risk,
)
from .spectra import (
    Spectrum,
    canonical_weights,
    exponential_spectrum,
    linear_spectrum,
    spectrum_to_json,
    uniform_spectrum,
)

SCHEMA = "riskcore/1"

#: axiom-check tolerance is AXIOM_TOL * (1 + input scale)
AXIOM_TOL = 1e-9

Oracle = Callable[[np.ndarray], float]


@dataclass(frozen=True)
class LipschitzClass:
    """A finite family of spectra with shared bound and Lipschitz constants.

    Construction verifies, on a 10^4-point grid, that every member stays
    within the class bound and moves no faster than the class Lipschitz
    constant allows. Members without a declared Lipschitz constant (the
    expected-shortfall family) are rejected.
    """

    members: Tuple[Spectrum, ...]
    class_C: float = field(init=False)
    class_L: float = field(init=False)

    def __init__(self, members: Sequence[Spectrum]):
        members = tuple(members)
        if not members:
            raise DomainError("a spectral class needs at least one member")
        for phi in members:
            if phi.lipschitz is None:
                raise NotLipschitz(
                    f"{phi.kind} spectrum carries no Lipschitz constant"
                )
        class_c = max(phi.bound for phi in members)
        class_l = max(phi.lipschitz for phi in members)
        grid = np.arange(1, 10_001, dtype=np.float64) / 10_000
        for phi in members:
            vals = np.asarray(phi.density(grid))
            if np.any(vals > class_c + 1e-12):
                raise DomainError(f"{phi.kind} spectrum exceeds the class bound")
            moves = np.abs(np.diff(vals))
            if np.any(moves > class_l * np.diff(grid) + 1e-9):
                raise NotLipschitz(
                    f"{phi.kind} spectrum violates the class Lipschitz constant"
                )
        object.__setattr__(self, "members", members)
        object.__setattr__(self, "class_C", float(class_c))
        object.__setattr__(self, "class_L", float(class_l))


def bundled_lipschitz_class() -> LipschitzClass:
    """The class used by the stock consistency experiments: the uniform
    spectrum, the steepest admissible linear spectrum, and three
    exponential risk-aversion levels."""
    return LipschitzClass(
        [
            uniform_spectrum(),
            linear_spectrum(2.0),
            exponential_spectrum(1.0),
            exponential_spectrum(2.0),
            exponential_spectrum(5.0),
        ]
    )


@dataclass
class ExperimentReport:
    """Config echo plus results for one experiment run.

    Serialisation is deterministic and excludes wall time by default so
    that identical (config, seed) runs produce byte-identical JSON no
    matter how many workers executed them.
    """

    experiment: str
    config: dict
    results: dict
    passed: Optional[bool]
    seed: int
    wall_time_s: float = 0.0

    def to_dict(self, include_timing: bool = False) -> dict:
        out = {
            "schema": SCHEMA,
            "experiment": self.experiment,
            "config": self.config,
            "results": self.results,
            "passed": self.passed,
            "seed": self.seed,
        }
        if include_timing:
            out["wall_time_s"] = self.wall_time_s
        return out

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(self.to_dict(include_timing=include_timing))


def sample_from(
    dist: ReferenceDistribution, gen: np.random.Generator, n: int
) -> np.ndarray:
    """Inverse-transform draws; 1 - U keeps the argument inside (0, 1]."""
    return np.asarray(dist.quantile(1.0 - gen.random(n)), dtype=np.float64)


# ---------------------------------------------------------------------------
# coherence axioms
# ---------------------------------------------------------------------------

def comonotonic_pair(
    gen: np.random.Generator, n: int
) -> Tuple[np.ndarray, np.ndarray]:
    """A comonotonic pair (g(u), h(u)) from a shared uniform vector and two
    independent random non-decreasing piecewise-linear transforms, which
    guarantees (x_i - x_j)(y_i - y_j) >= 0 for all i, j."""
    u = gen.random(n)

    def transform() -> np.ndarray:
        knots = np.concatenate([[0.0], np.sort(gen.random(3)), [1.0]])
        slopes = gen.random(4) * 2.0
        heights = gen.standard_normal() + np.concatenate(
            [[0.0], np.cumsum(slopes * np.diff(knots))]
        )
        return np.interp(u, knots, heights)

    return transform(), transform()


@dataclass
class AxiomReport:
    """Outcome of the randomized axiom suite for one estimator.

    axioms maps each tested axiom to its pass flag; counterexamples holds,
    per failed axiom, the first violating trial with inputs and both
    sides; counterexample is the first of those in axiom order.
    """

    passed: bool
    trials: int
    n: int
    axioms: dict
    counterexamples: dict

    @property
    def counterexample(self) -> Optional[dict]:
        for name in self.axioms:
            if name in self.counterexamples:
                return self.counterexamples[name]
        return None

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA,
            "passed": self.passed,
            "trials": self.trials,
            "n": self.n,
            "axioms": self.axioms,
        }
        if self.counterexamples:
            out["counterexamples"] = self.counterexamples
        return out


def _oracle_value(oracle: Oracle, x: np.ndarray) -> float:
    v = float(oracle(np.asarray(x, dtype=np.float64)))
    if not np.isfinite(v):
        raise OracleFailure(f"oracle returned {v}")
    return v


def check_axioms(
    oracle: Oracle,
    n: int,
    trials: int,
    rng: RngSpec,
    law_invariant: bool = True,
    comonotonic: bool = True,
) -> AxiomReport:
    """Randomized verification of the coherence axioms.

    Every axiom is tested `trials` times at tolerance 1e-9 * (1 + scale),
    each axiom on its own RNG stream; an axiom stops at its first
    violation, which is recorded as a concrete counterexample. Law
    invariance and comonotonic additivity only apply to estimators
    claiming those properties, so they can be switched off.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")

    def tol(scale: float) -> float:
        return AXIOM_TOL * (1.0 + scale)

    def monotonicity(gen: np.random.Generator) -> Optional[dict]:
        for t in range(trials):
            x = gen.standard_normal(n)
            y = x + np.abs(gen.standard_normal(n))
            lhs, rhs = _oracle_value(oracle, x), _oracle_value(oracle, y)
            if lhs < rhs - tol(max(np.abs(x).max(), np.abs(y).max())):
                return {"trial": t, "x": x.tolist(), "y": y.tolist(),
                        "lhs": lhs, "rhs": rhs}
        return None

    def cash_additivity(gen: np.random.Generator) -> Optional[dict]:
        for t in range(trials):
            x = gen.standard_normal(n)
            m = float(gen.standard_normal())
            lhs = _oracle_value(oracle, x + m)
            rhs = _oracle_value(oracle, x) - m
            if abs(lhs - rhs) > tol(np.abs(x).max() + abs(m)):
                return {"trial": t, "x": x.tolist(), "m": m,
                        "lhs": lhs, "rhs": rhs}
        return None

    def positive_homogeneity(gen: np.random.Generator) -> Optional[dict]:
        # the first trial pins lambda = 0: rho(0) must be 0
        for t in range(trials):
            x = gen.standard_normal(n)
            lam = 0.0 if t == 0 else float(np.abs(gen.standard_normal()))
            lhs = _oracle_value(oracle, lam * x)
            rhs = lam * _oracle_value(oracle, x)
            if abs(lhs - rhs) > tol((1.0 + lam) * np.abs(x).max()):
                return {"trial": t, "x": x.tolist(), "lambda": lam,
                        "lhs": lhs, "rhs": rhs}
        return None

    def subadditivity(gen: np.random.Generator) -> Optional[dict]:
        for t in range(trials):
            x = gen.standard_normal(n)
            y = gen.standard_normal(n)
            lhs = _oracle_value(oracle, x + y)
            rhs = _oracle_value(oracle, x) + _oracle_value(oracle, y)
            if lhs > rhs + tol(np.abs(x).max() + np.abs(y).max()):
                return {"trial": t, "x": x.tolist(), "y": y.tolist(),
                        "lhs": lhs, "rhs": rhs}
        return None

    def law_invariance(gen: np.random.Generator) -> Optional[dict]:
        for t in range(trials):
            x = gen.standard_normal(n)
            perm = gen.permutation(n)
            lhs = _oracle_value(oracle, x[perm])
            rhs = _oracle_value(oracle, x)
            if abs(lhs - rhs) > tol(np.abs(x).max()):
                return {"trial": t, "x": x.tolist(), "perm": perm.tolist(),
                        "lhs": lhs, "rhs": rhs}
        return None

    def comonotonic_additivity(gen: np.random.Generator) -> Optional[dict]:
        for t in range(trials):
            x, y = comonotonic_pair(gen, n)
            lhs = _oracle_value(oracle, x + y)
            rhs = _oracle_value(oracle, x) + _oracle_value(oracle, y)
            if abs(lhs - rhs) > tol(np.abs(x).max() + np.abs(y).max()):
                return {"trial": t, "x": x.tolist(), "y": y.tolist(),
                        "lhs": lhs, "rhs": rhs}
        return None

    checks = [
        ("monotonicity", monotonicity),
        ("cash_additivity", cash_additivity),
        ("positive_homogeneity", positive_homogeneity),
        ("subadditivity", subadditivity),
    ]
    if law_invariant:
        checks.append(("law_invariance", law_invariance))
    if comonotonic:
        checks.append(("comonotonic_additivity", comonotonic_additivity))

    axioms: dict = {}
    counterexamples: dict = {}
    for idx, (name, run) in enumerate(checks):
        stream = (rng.stream_id * 8 + idx) % 2**64
        counter = run(RngSpec(rng.seed, stream).generator())
        axioms[name] = counter is None
        if counter is not None:
            counter["axiom"] = name
            counterexamples[name] = counter
    return AxiomReport(not counterexamples, trials, n, axioms, counterexamples)


# ---------------------------------------------------------------------------
# consistency and rate experiments
# ---------------------------------------------------------------------------

def _class_errors(
    cls: LipschitzClass,
    dist: ReferenceDistribution,
    n_grid: Sequence[int],
    reps: int,
    rng: RngSpec,
    threads: int,
) -> List[np.ndarray]:
    """Per n: the vector over reps of the worst error across the class."""
    targets = np.array(
        [population_spectral_risk(dist, phi) for phi in cls.members]
    )
    per_n: List[np.ndarray] = []
    for i_n, n in enumerate(n_grid):
        weights = np.vstack(
            [canonical_weights(phi, n).weights for phi in cls.members]
        )

        def one(rep: int) -> float:
            gen = RngSpec(rng.seed, ((i_n + 1) << 32) | rep).generator()
            xs = np.sort(sample_from(dist, gen, n))
            estimates = weights @ (-xs)
            return float(np.max(np.abs(estimates - targets)))

        per_n.append(np.asarray(indexed_map(one, reps, threads=threads)))
    return per_n


def consistency_sweep(
    cls: LipschitzClass,
    dist: ReferenceDistribution,
    n_grid: Sequence[int],
    reps: int,
    rng: RngSpec,
    threshold: Optional[float] = None,
    min_pass_fraction: float = 1.0,
    threads: int = 1,
) -> ExperimentReport:
    """Worst-over-class estimation error against population values, per n.

    The pass flag (when a threshold is given) asks that at the largest n
    at least min_pass_fraction of the reps beat the threshold.
    """
    if list(n_grid) != sorted(n_grid) or len(n_grid) < 1:
        raise DomainError("n_grid must be a non-empty increasing sequence")
    started = time.perf_counter()
    per_n = _class_errors(cls, dist, n_grid, reps, rng, threads)
    rows = [
        {
            "n": int(n),
            "median_error": float(np.median(errs)),
            "max_error": float(np.max(errs)),
            "errors": [float(e) for e in errs],
        }
        for n, errs in zip(n_grid, per_n)
    ]
    passed = None
    if threshold is not None:
        frac = float(np.mean(per_n[-1] < threshold))
        passed = bool(frac >= min_pass_fraction)
    config = {
        "class": [spectrum_to_json(phi) for phi in cls.members],
        "dist": distribution_to_json(dist),
        "n_grid": [int(n) for n in n_grid],
        "reps": int(reps),
        "threshold": threshold,
        "min_pass_fraction": min_pass_fraction,
    }
    return ExperimentReport(
        "consistency", config, {"per_n": rows}, passed, rng.seed,
        time.perf_counter() - started,
    )


def rate_experiment(
    cls: LipschitzClass,
    dist: ReferenceDistribution,
    n_grid: Sequence[int],
    reps: int,
    rng: RngSpec,
    slope_band: Optional[Tuple[float, float]] = None,
    threads: int = 1,
) -> ExperimentReport:
    """Least-squares slope of log median error against log n.

    A root-n rate shows up as a slope near -1/2; the experiment fails
    (DegenerateFit) when errors vanish, as for a point mass.
    """
    if len(n_grid) < 2:
        raise DomainError("rate fit needs at least two sample sizes")
    started = time.perf_counter()
    per_n = _class_errors(cls, dist, n_grid, reps, rng, threads)
    medians = np.array([float(np.median(errs)) for errs in per_n])
    scale = max(
        abs(population_spectral_risk(dist, phi)) for phi in cls.members
    )
    if np.any(medians <= 1e-14 * (1.0 + scale)):
        raise DegenerateFit("median errors underflow; log-log fit undefined")
    slope, intercept = np.polyfit(np.log(np.asarray(n_grid, float)),
                                  np.log(medians), 1)
    rows = [
        {"n": int(n), "median_error": float(np.median(errs)),
         "max_error": float(np.max(errs))}
        for n, errs in zip(n_grid, per_n)
    ]
    passed = None
    if slope_band is not None:
        passed = bool(slope_band[0] <= slope <= slope_band[1])
    config = {
        "class": [spectrum_to_json(phi) for phi in cls.members],
        "dist": distribution_to_json(dist),
        "n_grid": [int(n) for n in n_grid],
        "reps": int(reps),
        "slope_band": list(slope_band) if slope_band is not None else None,
    }
    results = {
        "per_n": rows,
        "slope": float(slope),
        "intercept": float(intercept),
    }
    return ExperimentReport(
        "rate", config, results, passed, rng.seed,
        time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# CLT and bootstrap checks
# ---------------------------------------------------------------------------

def _gate_clt_inputs(phi: Spectrum, dist: ReferenceDistribution) -> float:
    if phi.lipschitz is None:
        raise NotLipschitz(
            f"{phi.kind} spectrum is not Lipschitz; the CLT and bootstrap "
            "diagnostics require a Lipschitz spectrum"
        )
    sigma2 = asymptotic_variance(phi, dist)
    if sigma2 <= 1e-12:
        raise DegenerateVariance(f"asymptotic variance {sigma2} is degenerate")
    return sigma2


def clt_check(
    phi: Spectrum,
    dist: ReferenceDistribution,
    n: int,
    reps: int,
    rng: RngSpec,
    threshold: float = 0.05,
    threads: int = 1,
) -> ExperimentReport:
    """Kolmogorov distance of sqrt(n)-scaled estimation errors to the
    normal limit with the plug-in asymptotic variance."""
    if reps < 1:
        raise DomainError(f"reps must be >= 1, got {reps}")
    started = time.perf_counter()
    sigma2 = _gate_clt_inputs(phi, dist)
    target = population_spectral_risk(dist, phi)
    weights = canonical_weights(phi, n).weights
    root_n = np.sqrt(n)

    def one(rep: int) -> float:
        gen = RngSpec(rng.seed, rep + 1).generator()
        xs = np.sort(sample_from(dist, gen, n))
        return float(root_n * (np.dot(weights, -xs) - target))

    draws = np.asarray(indexed_map(one, reps, threads=threads))
    limit = ReferenceDistribution("normal", mean=0.0, sd=float(np.sqrt(sigma2)))
    d_k = kolmogorov_distance(Sample(draws), limit)
    config = {
        "spectrum": spectrum_to_json(phi),
        "dist": distribution_to_json(dist),
        "n": int(n),
        "reps": int(reps),
        "threshold": threshold,
    }
    results = {"sigma2": float(sigma2), "d_K": float(d_k),
               "population_risk": float(target)}
    return ExperimentReport(
        "clt", config, results, bool(d_k < threshold), rng.seed,
        time.perf_counter() - started,
    )


def bootstrap_check(
    phi: Spectrum,
    dist: ReferenceDistribution,
    n: int,
    B: int,
    rng: RngSpec,
    threshold: float = 0.08,
    grid_m: int = 100,
    threads: int = 1,
) -> ExperimentReport:
    """Bootstrap validity: one sample of size n, B resampled replicates,
    Kolmogorov and truncated-grid distances to the normal limit."""
    started = time.perf_counter()
    sigma2 = _gate_clt_inputs(phi, dist)
    gen = RngSpec(rng.seed, 0).generator()
    sample = Sample(sample_from(dist, gen, n))
    reps = bootstrap_distribution(sample, phi, B, rng, threads=threads)
    degenerate = bool(np.ptp(sample.values) == 0.0 or np.ptp(reps) == 0.0)
    limit = ReferenceDistribution("normal", mean=0.0, sd=float(np.sqrt(sigma2)))
    rep_sample = Sample(reps)
    d_k = kolmogorov_distance(rep_sample, limit)
    d_k_m = truncated_kolmogorov(rep_sample, limit, grid_m)
    passed = None if degenerate else bool(d_k < threshold and d_k_m <= d_k)
    config = {
        "spectrum": spectrum_to_json(phi),
        "dist": distribution_to_json(dist),
        "n": int(n),
        "B": int(B),
        "threshold": threshold,
        "grid_m": int(grid_m),
    }
    results = {
        "n": int(n),
        "B": int(B),
        "sigma2": float(sigma2),
        "d_K": float(d_k),
        "d_K_m": float(d_k_m),
        "seed": rng.seed,
        "degenerate": degenerate,
    }
    return ExperimentReport(
        "bootstrap", config, results, passed, rng.seed,
        time.perf_counter() - started,
    )


# ---------------------------------------------------------------------------
# Kusuoka plug-in surrogates
# ---------------------------------------------------------------------------

def kusuoka_tightness_gap(
    M: RepresentingSet, x: Sample, delta: float
) -> Tuple[float, float]:
    """Effect of censoring mixture mass below level delta.

    Returns (gap, bound): the change of the plug-in value when every
    vertex's mass on levels k/n <= delta is removed and the vertex is
    renormalised, and the envelope bound (C + 1) * ||x||_inf * eps with
    C = 1 and eps the largest censored mass.
    """
    es = discrete_es_profile(x)
    full, _ = kusuoka_plugin(M, es)
    levels = np.arange(1, M.n + 1, dtype=np.float64) / M.n
    keep = levels > delta
    if not np.any(keep):
        raise DomainError("censoring removed every level")
    censored = M.vertices * keep
    kept_mass = censored.sum(axis=1)
    if np.any(kept_mass <= 0.0):
        raise DomainError("a vertex lost all of its mass to censoring")
    censored = censored / kept_mass[:, None]
    cens_value = float(np.max(censored @ es))
    eps = float(np.max(1.0 - kept_mass))
    bound = 2.0 * float(np.max(np.abs(x.values))) * eps
    return abs(full - cens_value), bound


def kusuoka_grid_gap(
    x: Sample, atom_levels: Sequence[float], atom_masses: Sequence[float], m: int
) -> Tuple[float, float]:
    """Effect of refining the level grid from mesh 1/m to 1/(2m).

    The mixture atoms sit at arbitrary levels in (0, 1]; each grid maps
    an atom to the discrete-ES level ceil(grid * level) / grid. Returns
    (gap, bound) where bound is the exact transported modulus
    sum_j nu_j |dES difference between the two assigned levels|.
    """
    if m < 1:
        raise DomainError(f"m must be >= 1, got {m}")
    levels = np.asarray(atom_levels, dtype=np.float64)
    masses = np.asarray(atom_masses, dtype=np.float64)
    if np.any(levels <= 0.0) or np.any(levels > 1.0):
        raise DomainError("atom levels must lie in (0, 1]")
    es = discrete_es_profile(x)
    n = x.n

    def assigned(grid: int) -> np.ndarray:
        j = np.ceil(grid * levels).astype(np.int64)
        # k = ceil(n * j / grid) in exact integer arithmetic
        k = np.minimum(-((-n * j) // grid), n)
        return es[k - 1]

    coarse, fine = assigned(m), assigned(2 * m)
    gap = abs(float(np.dot(masses, coarse)) - float(np.dot(masses, fine)))
    bound = float(np.dot(masses, np.abs(coarse - fine)))
    return gap, bound
