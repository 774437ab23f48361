"""Batch command-line front end.

Subcommands
-----------
value       nested exchangeable transport value between two mixture files
map         Monge solvability verdict; transforms prefix rows from stdin
approx      finite-dimensional value-convergence experiment (CSV + SVG)
audit       log-concavity modulus curve of a Gaussian family (CSV + SVG)
caffarelli  contraction check between two one-dimensional laws (JSON)

Exit codes: 0 ok, 2 input error, 3 solver error, 4 Monge-infeasible.
Errors are reported as one JSON object on stderr. Output files are written
atomically (temp file + rename); identical run specs with identical seeds
produce byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from dataclasses import dataclass, field

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_SOLVER = 3
EXIT_MONGE = 4


class _CliInputError(Exception):
    def __init__(self, message, path=None):
        super().__init__(message)
        self.path = path


@dataclass
class RunSpec:
    """Validated parameters of one CLI invocation."""

    command: str
    inputs: list = field(default_factory=list)
    grid_size: int = 100_000
    n_list: list = field(default_factory=lambda: [1, 2, 4, 8])
    sample_size: int = 500
    replications: int = 20
    seed: int | None = None
    backend: str = "exact"
    epsilon: float = 0.05
    out_dir: str | None = None

    def validate(self):
        if self.grid_size < 1:
            raise _CliInputError("grid size must be >= 1")
        if any(n < 1 for n in self.n_list) or any(
            b <= a for a, b in zip(self.n_list, self.n_list[1:])
        ):
            raise _CliInputError("n-list must be strictly increasing positive integers")
        if self.sample_size < 1:
            raise _CliInputError("samples must be >= 1")
        if self.replications < 2:
            raise _CliInputError("reps must be >= 2")
        if self.backend not in ("exact", "entropic"):
            raise _CliInputError(f"unknown backend {self.backend!r}")
        if self.epsilon <= 0:
            raise _CliInputError("epsilon must be > 0")
        if self.out_dir is not None:
            if not os.path.isdir(self.out_dir):
                raise _CliInputError(f"output directory {self.out_dir!r} does not exist")
            if not os.access(self.out_dir, os.W_OK):
                raise _CliInputError(f"output directory {self.out_dir!r} is not writable")


def _atomic_write(directory: str, name: str, text: str):
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, os.path.join(directory, name))
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fail(kind: str, message: str, code: int, **extra) -> int:
    payload = {"error": kind, "message": message, **extra}
    print(json.dumps(payload), file=sys.stderr)
    return code


def _load_mixture(path: str):
    from .definetti import parse_mixture

    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise _CliInputError(f"cannot read {path!r}: {exc}", path=path) from exc
    return parse_mixture(text)


def _load_single_law(path: str):
    from .dist1d import dist_from_dict

    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise _CliInputError(f"cannot read {path!r}: {exc}", path=path) from exc
    except json.JSONDecodeError as exc:
        raise _CliInputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return dist_from_dict(obj)


def cmd_value(spec: RunSpec) -> int:
    from .dist1d import QuantileGrid
    from .outer_ot import coupling_to_csv, exchangeable_value

    mu = _load_mixture(spec.inputs[0])
    nu = _load_mixture(spec.inputs[1])
    value, coupling, C = exchangeable_value(
        mu, nu, QuantileGrid(spec.grid_size), backend=spec.backend, epsilon=spec.epsilon
    )
    print(f"value {value:.12g}")
    if spec.out_dir:
        _atomic_write(spec.out_dir, "coupling.csv", coupling_to_csv(coupling, C))
    return EXIT_OK


def cmd_map(spec: RunSpec) -> int:
    from .dist1d import QuantileGrid
    from .outer_ot import (
        apply_exchangeable_map,
        exchangeable_value,
        monge_solvability,
        verdict_to_dict,
    )

    mu = _load_mixture(spec.inputs[0])
    nu = _load_mixture(spec.inputs[1])
    _, coupling, _ = exchangeable_value(mu, nu, QuantileGrid(spec.grid_size))
    verdict = monge_solvability(mu, nu, coupling)
    doc = verdict_to_dict(verdict)
    print(json.dumps(doc))
    if spec.out_dir:
        _atomic_write(spec.out_dir, "verdict.json", json.dumps(doc, indent=2) + "\n")
    if not verdict.solvable:
        return _fail("monge", verdict.reason, EXIT_MONGE, witness=doc["witness"])
    if not sys.stdin.isatty():
        for line in sys.stdin:
            line = line.strip()
            if not line:
                continue
            row = [float(tok) for tok in line.split(",")]
            out = apply_exchangeable_map(verdict.map, mu, row)
            print(",".join(repr(float(x)) for x in out))
    return EXIT_OK


def cmd_approx(spec: RunSpec) -> int:
    from .charts import Series, line_chart
    from .dist1d import QuantileGrid
    from .findim_approx import convergence_experiment

    mu = _load_mixture(spec.inputs[0])
    nu = _load_mixture(spec.inputs[1])
    table = convergence_experiment(
        mu,
        nu,
        spec.n_list,
        spec.sample_size,
        spec.replications,
        spec.seed,
        QuantileGrid(spec.grid_size),
    )
    for r in table.rows:
        print(f"n={r.n} mean={r.mean:.12g} half_width={r.half_width:.6g}")
    print(f"reference {table.reference:.12g}")
    print(f"spearman {table.spearman:.6g}")
    if spec.out_dir:
        _atomic_write(spec.out_dir, "convergence.csv", table.to_csv())
        chart = line_chart(
            "Empirical value vs dimension",
            "n",
            "value",
            [
                Series(
                    "mean +- CI",
                    tuple(r.n for r in table.rows),
                    tuple(r.mean for r in table.rows),
                    tuple(r.half_width for r in table.rows),
                )
            ],
            reference=table.reference,
        )
        _atomic_write(spec.out_dir, "convergence.svg", chart)
    return EXIT_OK


def cmd_audit(spec: RunSpec, family_args) -> int:
    from .charts import Series, line_chart
    from .findim_approx import ExchangeableGaussian
    from .logconcave_audit import QuadraticPotential, counterexample_projection, modulus_curve

    if family_args.counterexample:
        family = counterexample_projection(QuadraticPotential(family_args.curvature))
    else:
        family = ExchangeableGaussian(family_args.sigma2, family_args.rho)
    curve = modulus_curve(family, spec.n_list)
    for n, kappa in curve.rows:
        print(f"n={n} kappa={kappa:.12g}")
    print(f"uniform: {'yes' if curve.uniform else 'no'}")
    if spec.out_dir:
        _atomic_write(spec.out_dir, "modulus.csv", curve.to_csv())
        chart = line_chart(
            "Uniform log-concavity modulus vs dimension",
            "n",
            "kappa",
            [
                Series(
                    "kappa_n",
                    tuple(n for n, _ in curve.rows),
                    tuple(k for _, k in curve.rows),
                )
            ],
        )
        _atomic_write(spec.out_dir, "modulus.svg", chart)
    return EXIT_OK


def cmd_caffarelli(spec: RunSpec, bounds) -> int:
    from .wasserstein1d import caffarelli_check

    source = _load_single_law(spec.inputs[0])
    target = _load_single_law(spec.inputs[1])
    report = caffarelli_check(
        source, target, bounds.C, bounds.c, probes=bounds.probes, seed=spec.seed
    )
    doc = {
        "estimate": report.estimate,
        "bound": report.bound,
        "satisfied": report.satisfied,
    }
    print(json.dumps(doc))
    if spec.out_dir:
        _atomic_write(spec.out_dir, "caffarelli.json", json.dumps(doc, indent=2) + "\n")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="exot", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed_required=False):
        sp.add_argument("--grid-size", type=int, default=100_000)
        sp.add_argument("--out", default=None, help="output directory for files")
        sp.add_argument("--seed", type=int, required=seed_required, default=None)

    sp = sub.add_parser("value", help="nested exchangeable transport value")
    sp.add_argument("mu")
    sp.add_argument("nu")
    sp.add_argument("--backend", choices=["exact", "entropic"], default="exact")
    sp.add_argument("--epsilon", type=float, default=0.05)
    common(sp)

    sp = sub.add_parser("map", help="Monge solvability verdict / prefix transform")
    sp.add_argument("mu")
    sp.add_argument("nu")
    common(sp)

    sp = sub.add_parser("approx", help="finite-dimensional convergence experiment")
    sp.add_argument("mu")
    sp.add_argument("nu")
    sp.add_argument("--n-list", default="1,2,4,8")
    sp.add_argument("--samples", type=int, default=500)
    sp.add_argument("--reps", type=int, default=20)
    common(sp, seed_required=True)

    sp = sub.add_parser("audit", help="log-concavity modulus curve")
    group = sp.add_mutually_exclusive_group()
    group.add_argument("--counterexample", action="store_true")
    sp.add_argument("--sigma2", type=float, default=1.0)
    sp.add_argument("--rho", type=float, default=0.0)
    sp.add_argument("--curvature", type=float, default=1.0)
    sp.add_argument("--n-list", default="1,2,4,8,16")
    common(sp)

    sp = sub.add_parser("caffarelli", help="contraction bound check")
    sp.add_argument("source")
    sp.add_argument("target")
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--probes", type=int, default=64)
    common(sp, seed_required=True)
    return p


def _spec_from_args(args) -> RunSpec:
    spec = RunSpec(command=args.command)
    spec.grid_size = getattr(args, "grid_size", 100_000)
    spec.out_dir = getattr(args, "out", None)
    spec.seed = getattr(args, "seed", None)
    if hasattr(args, "n_list"):
        try:
            spec.n_list = [int(tok) for tok in str(args.n_list).split(",") if tok]
        except ValueError as exc:
            raise _CliInputError(f"invalid n-list {args.n_list!r}") from exc
    if hasattr(args, "samples"):
        spec.sample_size = args.samples
    if hasattr(args, "reps"):
        spec.replications = args.reps
    if hasattr(args, "backend"):
        spec.backend = args.backend
    if hasattr(args, "epsilon"):
        spec.epsilon = args.epsilon
    for name in ("mu", "nu", "source", "target"):
        if hasattr(args, name):
            spec.inputs.append(getattr(args, name))
    spec.validate()
    return spec


def main(argv=None) -> int:
    # EXOT_THREADS caps BLAS/OpenMP pools; must land before numpy is imported,
    # which is why the library is imported lazily inside the commands.
    threads = os.environ.get("EXOT_THREADS")
    if threads:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, threads)

    args = _build_parser().parse_args(argv)
    try:
        spec = _spec_from_args(args)
    except _CliInputError as exc:
        return _fail("input", str(exc), EXIT_INPUT)

    from .definetti import SchemaError, SupportError
    from .outer_ot import SolverError
    from .wasserstein1d import AtomicSourceError, CurvatureBoundError

    try:
        if spec.command == "value":
            return cmd_value(spec)
        if spec.command == "map":
            return cmd_map(spec)
        if spec.command == "approx":
            return cmd_approx(spec)
        if spec.command == "audit":
            return cmd_audit(spec, args)
        if spec.command == "caffarelli":
            return cmd_caffarelli(spec, args)
        return _fail("input", f"unknown command {spec.command!r}", EXIT_INPUT)
    except (_CliInputError, SchemaError) as exc:
        return _fail("schema", str(exc), EXIT_INPUT)
    except (ValueError, SupportError, AtomicSourceError, CurvatureBoundError) as exc:
        return _fail("solver", str(exc), EXIT_SOLVER)
    except SolverError as exc:
        return _fail("solver", str(exc), EXIT_SOLVER)


if __name__ == "__main__":
    sys.exit(main())
