"""Command-line interface.

Subcommands::

    trivpid decompose --system and --lambda 1
    trivpid decompose --pmf table.tsv --format table
    trivpid sweep --system copy --lambda 0:1:0.05
    trivpid gaussian --cov '{"cov": [[1, 0.6, 0.3], [0.6, 1, 0.1], [0.3, 0.1, 1]]}'
    trivpid verify --seed 7 --random 100

Exit codes: 0 success, 1 verification failure, 2 invalid input,
3 solver failure or broken internal identity.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from . import report
from .broja import SolverConfig, brute_force_pid
from .catalog import KINDS, SystemSpec, make_and, make_copy, make_dice, make_dyadic, make_parallel
from .catalog import make_triadic, make_xor, random_distribution, random_markov
from .dist import ROLES, JointDist3, load_pmf
from .errors import ConsistencyError, SolverError, TrivPIDError, ValidationError
from .gaussian import GaussianCov, gaussian_mutual_informations, gaussian_pid, gaussian_sr_nsr
from .subatoms import decompose

EXIT_OK, EXIT_VERIFY, EXIT_INPUT, EXIT_SOLVER = 0, 1, 2, 3
GRID_EPS = 1e-12
ORACLE_TOL = 1e-4
IDENTITY_TOL = 1e-6

# flag name -> SystemSpec parameter name
PARAM_FLAGS = (
    ("lambda_", "lambda"),
    ("alpha", "alpha"),
    ("lambda1", "lambda1"),
    ("lambda2", "lambda2"),
    ("lambda3", "lambda3"),
)


# --------------------------------------------------------------------------
# argument helpers
# --------------------------------------------------------------------------

def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (endpoints inclusive within 1e-12) or a single number."""
    parts = str(text).split(":")
    try:
        nums = [float(p) for p in parts]
    except ValueError:
        raise ValidationError(f"bad grid {text!r}; expected start:stop:step or a number")
    if len(nums) == 1:
        return nums
    if len(nums) != 3:
        raise ValidationError(f"bad grid {text!r}; expected start:stop:step")
    start, stop, step = nums
    if step <= 0 or stop < start or not all(map(math.isfinite, nums)):
        raise ValidationError(f"bad grid {text!r}; need step > 0 and stop >= start")
    out = []
    k = 0
    while start + k * step <= stop + GRID_EPS:
        v = start + k * step
        if abs(v - stop) <= GRID_EPS:
            v = stop
        out.append(round(v, 12))
        k += 1
    return out


def _precision(value: str) -> int:
    p = int(value)
    if not 1 <= p <= report.MAX_PRECISION:
        raise argparse.ArgumentTypeError(f"precision must be 1..{report.MAX_PRECISION}")
    return p


def _positive_float(value: str) -> float:
    v = float(value)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _positive_int(value: str) -> int:
    v = int(value)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _solver_config(args) -> SolverConfig:
    return SolverConfig(tol_bits=args.tol, max_iters=args.max_iters)


def _targets(args) -> tuple:
    return ROLES if args.target == "all" else (args.target,)


def _params(args, grid: bool):
    """Parameter dict for the chosen system (lists of values if ``grid``)."""
    out = {}
    for attr, name in PARAM_FLAGS:
        raw = getattr(args, attr, None)
        if raw is None:
            continue
        values = parse_grid(raw) if grid else [float(raw)]
        if len(values) != 1 and not grid:
            raise ValidationError(f"--{name} takes a single value here")
        if name == "alpha":
            if any(v != int(v) for v in values):
                raise ValidationError("--alpha must be an integer")
            values = [int(v) for v in values]
        out[name] = values if grid else values[0]
    return out


def _read_text(path_or_json: str) -> str:
    s = path_or_json.strip()
    if s.startswith("{"):
        return s
    try:
        return Path(path_or_json).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path_or_json}: {exc.strerror}")


def _load_input(args):
    """Return (JointDist3, descriptor) from --system / --pmf / --spec."""
    chosen = [n for n in ("system", "pmf", "spec") if getattr(args, n, None)]
    if len(chosen) != 1:
        raise ValidationError("give exactly one of --system, --pmf or --spec")
    if args.pmf:
        try:
            dist = load_pmf(args.pmf)
        except OSError as exc:
            raise ValidationError(f"cannot read {args.pmf}: {exc.strerror}")
        return dist, {"pmf": str(args.pmf)}
    if args.spec:
        try:
            spec = SystemSpec.from_json(_read_text(args.spec))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"spec is not valid JSON: {exc}")
    else:
        spec = SystemSpec(args.system, _params(args, grid=False))
    return spec.build(), {"system": spec.to_json()}


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------

def cmd_decompose(args, out) -> int:
    dist, descriptor = _load_input(args)
    dec = decompose(dist, _solver_config(args), jobs=args.jobs)
    rep = report.decomposition_report(dec, descriptor, _targets(args))
    if args.format == "table":
        out.write(report.to_table(rep, args.precision))
    elif args.format == "csv":
        rows = report.sweep_rows(dec, _targets(args))
        out.write(report.to_csv(rows, report.SWEEP_COLUMNS, args.precision))
    else:
        out.write(report.to_json(rep, args.precision) + "\n")
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    if not args.system:
        raise ValidationError("sweep needs --system")
    grids = _params(args, grid=True)
    names = list(grids)
    points = [dict(zip(names, combo)) for combo in product(*(grids[n] for n in names))]
    specs = [SystemSpec(args.system, p) for p in points]
    cfg = _solver_config(args)
    targets = _targets(args)

    def run(spec):
        try:
            return report.sweep_rows(decompose(spec.build(), cfg), targets)
        except TrivPIDError as exc:
            raise type(exc)(f"at {json.dumps(spec.params, sort_keys=True)}: {exc}") from exc

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(run, specs))
    else:
        results = [run(s) for s in specs]

    rows = []
    for params, block in zip(points, results):
        for row in block:
            rows.append({**{k: float(v) for k, v in params.items()}, **row})
    fmt = args.format or "csv"
    if fmt == "json":
        out.write(json.dumps(report.rounded(rows, args.precision), indent=2) + "\n")
    else:
        out.write(report.to_csv(rows, tuple(names) + report.SWEEP_COLUMNS, args.precision))
    return EXIT_OK


def gaussian_report(g: GaussianCov, targets=ROLES) -> dict:
    pids, splits = {}, {}
    for t in targets:
        atoms = gaussian_pid(g, t)
        a, b = atoms.sources
        pids[t] = {"sources": [a, b], "SI": atoms.si, f"UI_{a}": atoms.ui_a,
                   f"UI_{b}": atoms.ui_b, "CI": atoms.ci}
        sp = gaussian_sr_nsr(g, t)
        splits[t] = {"SR": sp.sr, "NSR": sp.nsr}
    return {
        "input": {"cov": g.cov.tolist()},
        "shannon": gaussian_mutual_informations(g),
        "pids": pids,
        "splits": splits,
    }


def cmd_gaussian(args, out) -> int:
    if not args.cov:
        raise ValidationError("gaussian needs --cov (JSON text or a file)")
    try:
        g = GaussianCov.from_json(_read_text(args.cov))
    except (json.JSONDecodeError, ValueError, TypeError) as exc:
        if isinstance(exc, TrivPIDError):
            raise
        raise ValidationError(f"bad covariance: {exc}")
    rep = gaussian_report(g, _targets(args))
    if args.format == "table":
        out.write(report.to_table(rep, args.precision))
    else:
        out.write(report.to_json(rep, args.precision) + "\n")
    return EXIT_OK


def verification_cases(seed: int, n_random: int):
    """Catalog systems plus seeded random ones; binary cases get the oracle."""
    cases = [
        ("and(0)", make_and(0.0)), ("and(0.5)", make_and(0.5)), ("and(1)", make_and(1.0)),
        ("copy(0)", make_copy(0.0)), ("copy(0.5)", make_copy(0.5)), ("copy(1)", make_copy(1.0)),
        ("xor", make_xor()), ("dice(0.5,1)", make_dice(0.5, 1)), ("dice(0.5,6)", make_dice(0.5, 6)),
        ("dyadic", make_dyadic()), ("triadic", make_triadic()),
        ("parallel(0.5,0.5,0.5)", make_parallel(0.5, 0.5, 0.5)),
    ]
    rng = np.random.default_rng(seed)
    for i in range(n_random):
        if i % 4 == 3:
            cases.append((f"random-markov-{i}", random_markov(rng)))
        else:
            cases.append((f"random-binary-{i}", random_distribution(rng, (2, 2, 2))))
    return cases


def _check_case(dist: JointDist3, cfg: SolverConfig) -> dict:
    dec = decompose(dist, cfg)
    residuals = {
        "cross_lattice": dec.pids.cross_lattice_residual(dist),
        "atom_reconstruction": dec.minimal.residual(dec.pids),
        "entropy_reconstruction": dec.entropy.residual,
    }
    if dist.shape == (2, 2, 2):
        worst = 0.0
        for t in ROLES:
            ref = brute_force_pid(dist, t)
            got = dec.pids.by_target[t]
            for s in ref.sources:
                worst = max(worst, abs(ref.ui(s) - got.ui(s)))
            worst = max(worst, abs(ref.si - got.si))
            worst = max(worst, abs(ref.ci - got.ci))
        residuals["oracle"] = worst
    return residuals


def cmd_verify(args, out) -> int:
    cfg = _solver_config(args)
    cases = verification_cases(args.seed, args.random)
    worst = {"oracle": 0.0, "identity": 0.0}
    failures = []
    for name, dist in cases:
        try:
            res = _check_case(dist, cfg)
        except TrivPIDError as exc:
            failures.append((name, dist, f"{type(exc).__name__}: {exc}"))
            continue
        ident = max(v for k, v in res.items() if k != "oracle")
        worst["identity"] = max(worst["identity"], ident)
        if "oracle" in res:
            worst["oracle"] = max(worst["oracle"], res["oracle"])
        if ident > IDENTITY_TOL:
            failures.append((name, dist, f"identity residual {ident:.3g} bits"))
        elif res.get("oracle", 0.0) > ORACLE_TOL:
            failures.append((name, dist, f"oracle disagreement {res['oracle']:.3g} bits"))

    out.write(f"cases: {len(cases)} (seed {args.seed}, {args.random} random)\n")
    out.write(f"worst atom residual vs oracle: {worst['oracle']:.3e} bits\n")
    out.write(f"worst identity residual: {worst['identity']:.3e} bits\n")
    if not failures:
        out.write("PASS\n")
        return EXIT_OK
    out.write(f"FAIL: {len(failures)} case(s)\n")
    for name, dist, why in failures:
        replay = {"case": name, "reason": why, "dist": dist.to_json()}
        out.write(json.dumps(replay, sort_keys=True) + "\n")
    return EXIT_VERIFY


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="trivpid",
        description="Partial information decompositions of trivariate distributions.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--target", choices=("X", "Y", "Z", "all"), default=None,
                        help="target role to report (default: all; X for sweep)")
    common.add_argument("--tol", type=_positive_float, default=1e-10,
                        help="solver tolerance in bits (default 1e-10)")
    common.add_argument("--max-iters", type=_positive_int, default=100000)
    common.add_argument("--precision", type=_precision, default=6,
                        help="significant digits in output (1-15, default 6)")
    common.add_argument("--jobs", type=_positive_int, default=1,
                        help="worker threads for independent solves")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--system", choices=KINDS)
    system.add_argument("--lambda", dest="lambda_", metavar="LAMBDA")
    system.add_argument("--alpha")
    system.add_argument("--lambda1")
    system.add_argument("--lambda2")
    system.add_argument("--lambda3")

    p = sub.add_parser("decompose", parents=[common, system], help="decompose one system")
    p.add_argument("--pmf", help="pmf file (x y z p table or JSON)")
    p.add_argument("--spec", help="system spec as JSON text or file")
    p.add_argument("--format", choices=("json", "table", "csv"), default="json")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("sweep", parents=[common, system],
                       help="parameter grid (start:stop:step) to CSV")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("gaussian", parents=[common], help="closed-form Gaussian PID")
    p.add_argument("--cov", help='JSON {"cov": [[...], [...], [...]]} as text or file')
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_gaussian)

    p = sub.add_parser("verify", parents=[common], help="oracle and identity self-check")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random", type=int, default=20, help="number of random systems")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    if args.target is None:
        args.target = "X" if args.command == "sweep" else "all"
    try:
        return args.func(args, out)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, ConsistencyError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except TrivPIDError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    raise SystemExit(main())
