"""Command line entry point: ``mmlp solve`` and ``mmlp bench``.

Exit codes: 0 KKT point, 2 infeasible stationary point, 3 unbounded dual
form, 4 Fritz-John point, 5 budget exhausted, 64 usage error, 65 input
that cannot be read, parsed or validated.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import _backend
from . import bench as _bench
from .diagnostics import emit_report, reports_for_rounds
from .factorization import RankDeficient, factorize
from .io import FORMATS, IoError, ParseError, jsonable, read_problem, write_text_atomic, write_trace
from .model import ValidationError
from .oracle import OracleStatus, TooLarge, solve_by_vertices
from .solver import SolverConfig, Status, outer_solve

EXIT_CODES = {
    Status.KKT: 0,
    Status.INFEASIBLE: 2,
    Status.UNBOUNDED: 3,
    Status.FRITZ_JOHN: 4,
    Status.BUDGET: 5,
}
EXIT_USAGE = 64
EXIT_DATAERR = 65

_ORACLE_MATCH = {
    Status.KKT: OracleStatus.OPTIMAL,
    Status.INFEASIBLE: OracleStatus.INFEASIBLE,
    Status.UNBOUNDED: OracleStatus.UNBOUNDED,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    d = SolverConfig()
    parser = _Parser(prog="mmlp", description="Primal-dual MM solver for linear programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="solve one problem file")
    s.add_argument("file", help="problem file (.json native-json or .csv dense-csv)")
    s.add_argument("--format", choices=FORMATS, help="override format detection by extension")
    s.add_argument("--mu0", type=float, default=d.mu0)
    s.add_argument("--rho0", type=float, default=d.rho0)
    s.add_argument("--delta", type=float, default=d.delta)
    s.add_argument("--gamma", type=float, default=d.gamma)
    s.add_argument("--eps", type=float, default=d.epsilon)
    s.add_argument("--max-outer", type=int, default=None)
    s.add_argument("--max-inner", type=int, default=None)
    s.add_argument("--trace", type=Path, help="write per-step trace as JSON lines")
    s.add_argument("--report", type=Path,
                   help="write convergence-rate report (.jsonl for JSON lines, else text)")
    s.add_argument("--oracle", action="store_true",
                   help="cross-check against vertex enumeration when small enough")

    b = sub.add_parser("bench", help="compare kernel backends on random problems")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--problems", type=int, default=20)
    b.add_argument("--repeat", type=int, default=5)
    return parser


def _oracle_block(p, outcome) -> dict:
    try:
        sol = solve_by_vertices(p)
    except (TooLarge, ValueError) as exc:
        return {"skipped": str(exc)}
    agrees = _ORACLE_MATCH.get(outcome.status) is sol.status
    if agrees and sol.status is OracleStatus.OPTIMAL:
        agrees = abs(outcome.objective - sol.obj) <= 1e-6 * (1.0 + abs(sol.obj))
    return {"status": sol.status.value, "objective": sol.obj, "agrees": bool(agrees)}


def _solve(args) -> int:
    try:
        cfg = SolverConfig(
            mu0=args.mu0, rho0=args.rho0, delta=args.delta, gamma=args.gamma,
            epsilon=args.eps, max_outer=args.max_outer, max_inner=args.max_inner,
        )
    except ValueError as exc:
        raise UsageError(f"mmlp solve: error: {exc}") from None
    try:
        pf = read_problem(args.file, args.format)
        p = pf.dual
        f = factorize(p)
    except OSError as exc:
        print(f"mmlp: cannot read {args.file}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_DATAERR
    except (ParseError, ValidationError, RankDeficient) as exc:
        print(f"mmlp: {args.file}: {exc}", file=sys.stderr)
        return EXIT_DATAERR

    outcome, trace = outer_solve(p, cfg, factor=f, keep_trace=args.trace is not None,
                                 record_rounds=args.report is not None)
    if pf.form == "standard":
        objective = float(p.c @ outcome.x)
    else:
        objective = outcome.objective
    doc = {
        "status": outcome.status.value,
        "objective": objective,
        "y": outcome.y,
        "x": outcome.x,
        "residuals": outcome.residuals._asdict(),
        "iterations": {"outer": outcome.outer_iterations, "inner_total": outcome.inner_iterations},
        "form": pf.form,
        "certificate": {k: v for k, v in outcome.certificate.items() if k != "objective"},
    }
    if args.oracle:
        doc["oracle"] = _oracle_block(p, outcome)
    try:
        if args.trace is not None:
            write_trace(trace, args.trace)
        if args.report is not None:
            fmt = "jsonl" if args.report.suffix in (".jsonl", ".json") else "text"
            reports = reports_for_rounds(p, outcome.rounds, f, eps=cfg.epsilon)
            write_text_atomic(args.report, emit_report(reports, fmt))
    except IoError as exc:
        print(f"mmlp: {exc}", file=sys.stderr)
        return EXIT_DATAERR
    print(json.dumps(jsonable(doc)))
    return EXIT_CODES[outcome.status]


def _bench_cmd(args) -> int:
    if args.problems < 1 or args.repeat < 1:
        raise UsageError("mmlp bench: error: --problems and --repeat must be >= 1")
    report = _bench.run(seed=args.seed, problems=args.problems, repeat=args.repeat)
    report["default_backend"] = _backend.BACKEND
    print(json.dumps(jsonable(report)))
    return 0


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "solve":
            return _solve(args)
        return _bench_cmd(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    with np.errstate(all="ignore"):
        code = run_cli()
    sys.exit(code)
