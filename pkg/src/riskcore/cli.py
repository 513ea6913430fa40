"""Batch command-line surface.

Every subcommand reads machine-readable inputs (JSON arguments, one
decimal per line for samples), writes machine-readable output, and exits
0 on success, 1 on a failed acceptance threshold or axiom counterexample,
2 on malformed input. All randomness enters through --seed.
"""

from __future__ import annotations

import argparse
import json
import shlex
import subprocess
import sys
from typing import IO, List, Optional, Sequence

import numpy as np

from .asymptotics import RngSpec, asymptotic_variance
from .core import Mixture, RepresentingSet, Sample, WeightVector, t_inverse, t_map
from .errors import OracleFailure, RiskError
from .estimators import (
    discrete_es,
    l_estimate,
    mixture_estimate,
    recover_comonotonic_weights,
    robust_sup,
)
from .harness import (
    SCHEMA,
    LipschitzClass,
    bootstrap_check,
    bundled_lipschitz_class,
    check_axioms,
    clt_check,
    consistency_sweep,
    rate_experiment,
)
from .population import distribution_from_json
from .spectra import canonical_weights, spectrum_from_json


def fmt(value: float) -> str:
    """Shortest decimal that round-trips the float exactly."""
    return repr(float(value))


def read_sample(path: str) -> Sample:
    """One decimal per line; a single leading non-numeric line is treated
    as a header; '-' reads standard input."""
    if path == "-":
        lines = sys.stdin.read().splitlines()
    else:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except OSError as exc:
            raise RiskError(f"cannot read sample file {path}: {exc}") from exc
    values: List[float] = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            values.append(float(text))
        except ValueError:
            if not values and lineno == 1:
                continue  # header
            raise RiskError(
                f"sample line {lineno} is not a number: {text!r}"
            ) from None
    if not values:
        raise RiskError(f"sample file {path} contains no values")
    return Sample(values)


def write_sample(values: Sequence[float], fh: IO[str]) -> None:
    for v in values:
        fh.write(fmt(v) + "\n")


def _parse_json(text: str, what: str) -> object:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise RiskError(f"malformed {what} JSON: {exc}") from exc


def _load_config(arg: str) -> dict:
    """Inline JSON object, or a path to a file holding one."""
    if arg.lstrip().startswith("{"):
        obj = _parse_json(arg, "config")
    else:
        try:
            with open(arg, "r", encoding="utf-8") as fh:
                obj = _parse_json(fh.read(), "config")
        except OSError as exc:
            raise RiskError(f"cannot read config {arg}: {exc}") from exc
    if not isinstance(obj, dict):
        raise RiskError("config JSON must be an object")
    return obj


def _vector_field(obj: object, key: str) -> List[float]:
    if isinstance(obj, dict):
        obj = obj.get(key)
    if not isinstance(obj, list):
        raise RiskError(f"expected a JSON array (or object with {key!r})")
    return [float(v) for v in obj]


def _weights_from_json(text: str) -> WeightVector:
    obj = _parse_json(text, "weights")
    values = np.asarray(_vector_field(obj, "weights"))
    monotone = bool(np.all(np.diff(values) <= 1e-15))
    return WeightVector(values, monotone=monotone)


def _mixture_from_json(text: str) -> Mixture:
    return Mixture(_vector_field(_parse_json(text, "mixture"), "mixture"))


def _repset_from_json(text: str) -> RepresentingSet:
    obj = _parse_json(text, "representing set")
    if not isinstance(obj, dict) or "vertices" not in obj:
        raise RiskError("representing-set JSON needs a 'vertices' field")
    return RepresentingSet(
        obj["vertices"], sorted_domain=bool(obj.get("sorted_domain", True))
    )


def _require(config: dict, key: str) -> object:
    if key not in config:
        raise RiskError(f"config is missing required field {key!r}")
    return config[key]


def _class_from_config(config: dict) -> LipschitzClass:
    spec = _require(config, "class")
    if spec == "bundled":
        return bundled_lipschitz_class()
    if not isinstance(spec, list):
        raise RiskError("config 'class' must be \"bundled\" or a list of spectra")
    return LipschitzClass([spectrum_from_json(s) for s in spec])


class SubprocessOracle:
    """Line-protocol adapter around an external estimator process: one
    whitespace-separated sample per request line, one decimal per reply."""

    def __init__(self, command: str):
        argv = shlex.split(command)
        if not argv:
            raise RiskError("empty oracle command")
        try:
            self.proc = subprocess.Popen(
                argv,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise RiskError(f"cannot start oracle {command!r}: {exc}") from exc

    def __call__(self, values: np.ndarray) -> float:
        assert self.proc.stdin is not None and self.proc.stdout is not None
        line = " ".join(fmt(v) for v in np.asarray(values, dtype=np.float64))
        try:
            self.proc.stdin.write(line + "\n")
            self.proc.stdin.flush()
            reply = self.proc.stdout.readline()
        except (OSError, BrokenPipeError) as exc:
            raise OracleFailure(f"oracle process failed: {exc}") from exc
        if not reply:
            raise OracleFailure("oracle process closed its output stream")
        try:
            return float(reply.strip())
        except ValueError:
            raise OracleFailure(
                f"oracle replied with a non-number: {reply.strip()!r}"
            ) from None

    def close(self) -> None:
        if self.proc.stdin is not None:
            try:
                self.proc.stdin.close()
            except OSError:
                pass
        try:
            self.proc.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self.proc.kill()

    def __enter__(self) -> "SubprocessOracle":
        return self

    def __exit__(self, *exc_info: object) -> None:
        self.close()


def _need_seed(args: argparse.Namespace) -> RngSpec:
    if args.seed is None:
        raise RiskError("this subcommand is stochastic; --seed is required")
    return RngSpec(int(args.seed))


# ---------------------------------------------------------------------------
# subcommand implementations
# ---------------------------------------------------------------------------

def cmd_estimate(args: argparse.Namespace) -> int:
    x = read_sample(args.sample)
    if args.spectrum is not None:
        phi = spectrum_from_json(_parse_json(args.spectrum, "spectrum"))
        value = l_estimate(canonical_weights(phi, x.n), x, sorted_domain=True)
        print(fmt(value))
    elif args.weights is not None:
        obj = _parse_json(args.weights, "weights")
        sorted_domain = True
        if isinstance(obj, dict):
            sorted_domain = bool(obj.get("sorted_domain", True))
        a = _weights_from_json(args.weights)
        print(fmt(l_estimate(a, x, sorted_domain=sorted_domain)))
    elif args.mixture is not None:
        mu = _mixture_from_json(args.mixture)
        print(fmt(mixture_estimate(mu, x)))
    else:
        M = _repset_from_json(args.repset)
        value, idx = robust_sup(M, x)
        print(json.dumps({"schema": SCHEMA, "value": value, "argmax_index": idx}))
    return 0


def cmd_weights(args: argparse.Namespace) -> int:
    phi = spectrum_from_json(_parse_json(args.spectrum, "spectrum"))
    a = canonical_weights(phi, args.n)
    print(json.dumps({
        "schema": SCHEMA,
        "n": args.n,
        "weights": [float(w) for w in a.weights],
    }))
    return 0


def cmd_decompose(args: argparse.Namespace) -> int:
    a = _weights_from_json(args.weights)
    mu = t_map(a)
    print(json.dumps({
        "schema": SCHEMA,
        "mixture": [float(m) for m in mu.masses],
    }))
    return 0


def cmd_compose(args: argparse.Namespace) -> int:
    mu = _mixture_from_json(args.mixture)
    a = t_inverse(mu)
    print(json.dumps({
        "schema": SCHEMA,
        "weights": [float(w) for w in a.weights],
        "monotone": True,
    }))
    return 0


def cmd_recover(args: argparse.Namespace) -> int:
    with SubprocessOracle(args.oracle) as oracle:
        a = recover_comonotonic_weights(oracle, args.n)
    print(json.dumps({
        "schema": SCHEMA,
        "n": args.n,
        "weights": [float(w) for w in a.weights],
    }))
    return 0


def cmd_es(args: argparse.Namespace) -> int:
    x = read_sample(args.sample)
    print(fmt(discrete_es(x, args.k)))
    return 0


def cmd_variance(args: argparse.Namespace) -> int:
    phi = spectrum_from_json(_parse_json(args.spectrum, "spectrum"))
    dist = distribution_from_json(_parse_json(args.dist, "distribution"))
    print(fmt(asymptotic_variance(phi, dist)))
    return 0


def _report_exit(report, args: argparse.Namespace) -> int:
    print(report.to_json(include_timing=args.timing))
    return 0 if report.passed is not False else 1


def cmd_clt(args: argparse.Namespace) -> int:
    rng = _need_seed(args)
    config = _load_config(args.config)
    report = clt_check(
        spectrum_from_json(_require(config, "spectrum")),
        distribution_from_json(_require(config, "dist")),
        n=int(_require(config, "n")),
        reps=int(_require(config, "reps")),
        rng=rng,
        threshold=float(config.get("threshold", 0.05)),
        threads=args.threads,
    )
    return _report_exit(report, args)


def cmd_bootstrap(args: argparse.Namespace) -> int:
    rng = _need_seed(args)
    config = _load_config(args.config)
    report = bootstrap_check(
        spectrum_from_json(_require(config, "spectrum")),
        distribution_from_json(_require(config, "dist")),
        n=int(_require(config, "n")),
        B=int(_require(config, "B")),
        rng=rng,
        threshold=float(config.get("threshold", 0.08)),
        grid_m=int(config.get("grid_m", 100)),
        threads=args.threads,
    )
    return _report_exit(report, args)


def cmd_consistency(args: argparse.Namespace) -> int:
    rng = _need_seed(args)
    config = _load_config(args.config)
    threshold = config.get("threshold")
    report = consistency_sweep(
        _class_from_config(config),
        distribution_from_json(_require(config, "dist")),
        n_grid=[int(n) for n in _require(config, "n_grid")],
        reps=int(_require(config, "reps")),
        rng=rng,
        threshold=None if threshold is None else float(threshold),
        min_pass_fraction=float(config.get("min_pass_fraction", 1.0)),
        threads=args.threads,
    )
    return _report_exit(report, args)


def cmd_rate(args: argparse.Namespace) -> int:
    rng = _need_seed(args)
    config = _load_config(args.config)
    band = config.get("slope_band")
    report = rate_experiment(
        _class_from_config(config),
        distribution_from_json(_require(config, "dist")),
        n_grid=[int(n) for n in _require(config, "n_grid")],
        reps=int(_require(config, "reps")),
        rng=rng,
        slope_band=None if band is None else (float(band[0]), float(band[1])),
        threads=args.threads,
    )
    return _report_exit(report, args)


def cmd_axioms(args: argparse.Namespace) -> int:
    rng = _need_seed(args)
    with SubprocessOracle(args.oracle) as oracle:
        report = check_axioms(
            oracle,
            n=args.n,
            trials=args.trials,
            rng=rng,
            law_invariant=not args.skip_law_invariance,
            comonotonic=not args.skip_comonotonic,
        )
    print(json.dumps(report.to_dict()))
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskcore",
        description="Coherent risk estimation toolkit: estimators, "
        "weight algebra, and asymptotic diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="evaluate a risk estimator on a sample")
    p.add_argument("--sample", required=True, help="sample file, '-' for stdin")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--spectrum", help="spectrum JSON (canonical plug-in)")
    group.add_argument("--weights", help="weight-vector JSON (L-estimator)")
    group.add_argument("--mixture", help="mixture JSON (ES-mixture form)")
    group.add_argument("--repset", help="representing-set JSON (robust supremum)")
    p.set_defaults(fn=cmd_estimate)

    p = sub.add_parser("weights", help="canonical weights of a spectrum")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_weights)

    p = sub.add_parser("decompose", help="weights -> ES-mixture masses")
    p.add_argument("--weights", required=True)
    p.set_defaults(fn=cmd_decompose)

    p = sub.add_parser("compose", help="ES-mixture masses -> weights")
    p.add_argument("--mixture", required=True)
    p.set_defaults(fn=cmd_compose)

    p = sub.add_parser(
        "recover", help="recover L-estimator weights from an oracle process"
    )
    p.add_argument("--oracle", required=True, help="oracle command line")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(fn=cmd_recover)

    p = sub.add_parser("es", help="discrete expected shortfall")
    p.add_argument("--sample", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(fn=cmd_es)

    p = sub.add_parser("variance", help="asymptotic variance of a plug-in")
    p.add_argument("--spectrum", required=True)
    p.add_argument("--dist", required=True)
    p.set_defaults(fn=cmd_variance)

    for name, fn in (
        ("clt", cmd_clt),
        ("bootstrap", cmd_bootstrap),
        ("consistency", cmd_consistency),
        ("rate", cmd_rate),
    ):
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", required=True, help="JSON object or file path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=1,
                       help="worker cap; never affects results")
        p.add_argument("--timing", action="store_true",
                       help="include wall time in the report")
        p.set_defaults(fn=fn)

    p = sub.add_parser("axioms", help="randomized coherence-axiom check")
    p.add_argument("--oracle", required=True, help="oracle command line")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--skip-law-invariance", action="store_true")
    p.add_argument("--skip-comonotonic", action="store_true")
    p.set_defaults(fn=cmd_axioms)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except RiskError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
