"""Command-line surface.

Exit codes: 0 when the question was decided (either way), 2 when the
answer is Unknown or the oracle is inconclusive, 1 on any error.  The
``VASSREACH_BUDGET_PROFILE`` environment variable picks the {tiny, desk,
stress} budget preset; explicit flags override individual fields.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from dataclasses import replace
from typing import Optional, Sequence

from . import __version__
from .core import Configuration, VassError, validate_walk
from .diophantine import BudgetExceeded, IntMatrix, hilbert_basis
from .geometry import geometric_dimension, orthogonal_indices
from .instance import (
    ParseError,
    Query,
    format_instance,
    generate_instance,
    parse_instance,
)
from .oracle import (
    Inconclusive,
    OracleBound,
    ProvenUnreachable,
    Reachable as OracleReachable,
    bfs_reach,
    certified_unreach,
)
from .report import build_record, render_json, render_text, write_report_dir
from .search import SearchBudget, Unknown, decide
from .selftest import run_all

EXIT_DECIDED = 0
EXIT_ERROR = 1
EXIT_UNKNOWN = 2

_PROFILES = {
    "tiny": SearchBudget.tiny,
    "desk": SearchBudget.desk,
    "stress": SearchBudget.stress,
}


def _profile_budget() -> SearchBudget:
    name = os.environ.get("VASSREACH_BUDGET_PROFILE", "desk")
    try:
        return _PROFILES[name]()
    except KeyError:
        raise VassError(
            f"unknown budget profile {name!r}; expected one of {sorted(_PROFILES)}"
        ) from None


def _load(path: str) -> Query:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise VassError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_instance(text)
    except ParseError as exc:
        raise VassError(f"{path}:{exc.line}:{exc.col}: {exc.message}") from None


def _budget_from(args: argparse.Namespace) -> SearchBudget:
    budget = _profile_budget()
    if args.budget_nodes is not None:
        budget = replace(budget, max_nodes=args.budget_nodes)
    if args.budget_size is not None:
        budget = replace(budget, max_cgs_size=args.budget_size)
    if args.seed is not None:
        budget = replace(budget, seed=args.seed)
    return budget


def _run_decision(args: argparse.Namespace, with_trajectory: bool) -> int:
    query = _load(args.file)
    budget = _budget_from(args)
    if args.threads < 1:
        raise VassError("--threads must be at least 1")
    # branch execution is serialized; the flag is recorded for the report
    started = time.perf_counter()
    verdict = decide(
        query.vass,
        query.start.state,
        query.start.location,
        query.target.state,
        query.target.location,
        budget,
    )
    elapsed = time.perf_counter() - started
    record = build_record(query, verdict, elapsed, budget, threads=args.threads)
    if args.json:
        print(render_json(record))
    else:
        print(render_text(record))
        if with_trajectory and record.walk is not None:
            print(_trajectory_table(query, record.walk))
    if args.report_dir:
        files = write_report_dir(record, query, args.report_dir)
        print(f"report-dir: {len(files)} files under {args.report_dir}", file=sys.stderr)
    return EXIT_UNKNOWN if isinstance(verdict, Unknown) else EXIT_DECIDED


def _trajectory_table(query: Query, walk) -> str:
    by_tid = {t.tid: t for t in query.vass.transitions}
    cfg = query.start
    lines = [f"  0: - {cfg.state} {' '.join(map(str, cfg.location))}"]
    for i, tid in enumerate(walk, start=1):
        t = by_tid[tid]
        cfg = Configuration(t.dst, tuple(x + d for x, d in zip(cfg.location, t.disp)))
        lines.append(f"{i:3d}: t{tid} {cfg.state} {' '.join(map(str, cfg.location))}")
    return "\n".join(lines)


def _cmd_check(args: argparse.Namespace) -> int:
    return _run_decision(args, with_trajectory=False)


def _cmd_witness(args: argparse.Namespace) -> int:
    return _run_decision(args, with_trajectory=True)


def _cmd_dim(args: argparse.Namespace) -> int:
    query = _load(args.file)
    print(geometric_dimension(query.vass))
    orth = orthogonal_indices(query.vass)
    print("orthogonal: " + (" ".join(map(str, orth)) if orth else "-"))
    return EXIT_DECIDED


def _cmd_hilbert(args: argparse.Namespace) -> int:
    try:
        with open(args.matrix, encoding="utf-8") as fh:
            rows = [
                [int(tok) for tok in line.split()]
                for line in fh
                if line.split() and not line.lstrip().startswith("#")
            ]
    except OSError as exc:
        raise VassError(f"cannot read {args.matrix}: {exc.strerror}") from None
    except ValueError as exc:
        raise VassError(f"{args.matrix}: {exc}") from None
    if not rows:
        raise VassError(f"{args.matrix}: empty matrix")
    if len({len(r) for r in rows}) != 1:
        raise VassError(f"{args.matrix}: ragged rows")
    try:
        basis = hilbert_basis(IntMatrix.from_rows(rows), budget=_profile_budget().dio_budget)
    except BudgetExceeded as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_UNKNOWN
    for vec in basis:
        print(" ".join(map(str, vec)))
    print(f"# {len(basis)} basis elements", file=sys.stderr)
    return EXIT_DECIDED


def _cmd_oracle(args: argparse.Namespace) -> int:
    query = _load(args.file)
    bound = OracleBound(args.norm_cap, args.max_configs, args.max_configs)
    fwd = bfs_reach(query.vass, query.start, query.target, bound)
    if isinstance(fwd, OracleReachable):
        end = validate_walk(query.vass, query.start, fwd.walk)
        assert end == query.target
        print("REACHABLE")
        print("walk: " + " ".join(map(str, fwd.walk)))
        return EXIT_DECIDED
    cert = certified_unreach(query.vass, query.start, query.target, bound)
    if isinstance(cert, ProvenUnreachable):
        print(f"UNREACHABLE (closed set of {cert.explored} configurations)")
        return EXIT_DECIDED
    assert isinstance(cert, Inconclusive)
    print(f"UNKNOWN ({cert.reason}; {cert.explored} configurations)")
    return EXIT_UNKNOWN


def _cmd_gen(args: argparse.Namespace) -> int:
    query = generate_instance(
        args.dim, args.geom_dim, args.states, args.norm, args.seed, args.boundary
    )
    sys.stdout.write(format_instance(query))
    return EXIT_DECIDED


def _cmd_selftest(args: argparse.Namespace) -> int:
    failed = 0
    for suite in run_all():
        mark = "ok" if suite.ok else "FAIL"
        print(f"{suite.name:20s} {mark:4s} {suite.detail}")
        failed += 0 if suite.ok else 1
    if failed:
        print(f"{failed} suite(s) failed", file=sys.stderr)
        return EXIT_ERROR
    return EXIT_DECIDED


def _decision_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("file", help="instance file")
    sub.add_argument("--budget-nodes", type=int, default=None, metavar="N",
                     help="max refinement tree nodes")
    sub.add_argument("--budget-size", type=int, default=None, metavar="N",
                     help="max constraint-graph sequence size")
    sub.add_argument("--seed", type=int, default=None, metavar="S")
    sub.add_argument("--threads", type=int, default=1, metavar="N",
                     help="accepted for compatibility; branches run serialized")
    sub.add_argument("--json", action="store_true",
                     help="machine-readable single-line report")
    sub.add_argument("--report-dir", default=None, metavar="DIR",
                     help="write delimited report and figures here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vassreach",
        description="Reachability workbench for vector addition systems with states",
    )
    parser.add_argument("--version", action="version", version=f"vassreach {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="decide reachability")
    _decision_flags(p)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("witness", help="decide and print the step-by-step walk")
    _decision_flags(p)
    p.set_defaults(func=_cmd_witness)

    p = sub.add_parser("dim", help="geometric dimension and orthogonal indices")
    p.add_argument("file")
    p.set_defaults(func=_cmd_dim)

    p = sub.add_parser("hilbert", help="Hilbert basis of a homogeneous system")
    p.add_argument("--matrix", required=True, help="whitespace-separated matrix file")
    p.set_defaults(func=_cmd_hilbert)

    p = sub.add_parser("oracle", help="brute-force verdict within bounds")
    p.add_argument("file")
    p.add_argument("--norm-cap", type=int, default=64, metavar="N")
    p.add_argument("--max-configs", type=int, default=100_000, metavar="N")
    p.set_defaults(func=_cmd_oracle)

    p = sub.add_parser("gen", help="emit a random instance with planted dimension")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--geom-dim", type=int, required=True)
    p.add_argument("--states", type=int, required=True)
    p.add_argument("--norm", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--boundary", type=int, default=3)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("selftest", help="run the invariant suites at desk scale")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except VassError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
