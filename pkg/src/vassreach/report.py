"""Machine-readable run reports and optional rendered artifacts.

A ``ReportRecord`` captures one decision run.  It renders three ways:
human text, a single JSON line (stable schema, explicit version), and a
report directory holding tab-delimited tables plus matplotlib figures.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import List, Optional, Tuple

from . import __version__
from .core import Configuration, Path, validate_walk
from .instance import Query, instance_digest
from .search import (
    Reachable,
    SearchBudget,
    TreeStats,
    Unknown,
    Unreachable,
    Verdict,
)

__all__ = ["SCHEMA_VERSION", "ReportRecord", "build_record", "render_text",
           "render_json", "write_report_dir"]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ReportRecord:
    verdict: str
    walk: Optional[Path]
    stats: TreeStats
    elapsed: float
    budget: SearchBudget
    digest: str
    detail: Tuple[str, ...] = ()
    threads: int = 1
    tool_version: str = __version__
    schema_version: int = SCHEMA_VERSION


def build_record(
    query: Query,
    verdict: Verdict,
    elapsed: float,
    budget: SearchBudget,
    threads: int = 1,
) -> ReportRecord:
    if isinstance(verdict, Reachable):
        name, walk, detail = "REACHABLE", verdict.walk, ()
    elif isinstance(verdict, Unreachable):
        name, walk, detail = "UNREACHABLE", None, ()
    else:
        assert isinstance(verdict, Unknown)
        name, walk, detail = "UNKNOWN", None, verdict.report
    return ReportRecord(
        verdict=name,
        walk=walk,
        stats=verdict.stats,
        elapsed=elapsed,
        budget=budget,
        digest=instance_digest(query),
        detail=tuple(detail),
        threads=threads,
    )


def _budget_pairs(b: SearchBudget) -> List[Tuple[str, object]]:
    return [
        ("max_nodes", b.max_nodes),
        ("max_cgs_size", b.max_cgs_size),
        ("dio_budget", b.dio_budget),
        ("pump_budget", b.pump_budget),
        ("seed", b.seed),
    ]


def render_text(record: ReportRecord) -> str:
    lines = [record.verdict]
    if record.walk is not None:
        lines.append("walk: " + " ".join(str(t) for t in record.walk))
    for reason in record.detail:
        lines.append("open: " + reason)
    s = record.stats
    lines.append(
        f"tree: {s.nodes} nodes, {s.leaves} leaves, depth {s.max_depth}, "
        f"max size {s.max_cgs_size}" + (", partial" if s.partial else "")
    )
    steps = ", ".join(f"{k}={v}" for k, v in sorted(s.steps.items()) if v)
    if steps:
        lines.append("steps: " + steps)
    budget = " ".join(f"{k}={v}" for k, v in _budget_pairs(record.budget))
    lines.append(f"budget: {budget} threads={record.threads}")
    lines.append(f"elapsed: {record.elapsed:.3f}s  input: {record.digest}  "
                 f"vassreach {record.tool_version}")
    return "\n".join(lines)


def render_json(record: ReportRecord) -> str:
    payload = {
        "schema": record.schema_version,
        "tool": "vassreach",
        "version": record.tool_version,
        "verdict": record.verdict,
        "walk": list(record.walk) if record.walk is not None else None,
        "detail": list(record.detail),
        "stats": {
            "nodes": record.stats.nodes,
            "leaves": record.stats.leaves,
            "max_depth": record.stats.max_depth,
            "max_cgs_size": record.stats.max_cgs_size,
            "steps": dict(sorted(record.stats.steps.items())),
            "partial": record.stats.partial,
        },
        "budget": dict(_budget_pairs(record.budget)),
        "threads": record.threads,
        "elapsed": round(record.elapsed, 6),
        "digest": record.digest,
    }
    return json.dumps(payload, separators=(",", ":"), sort_keys=True)


def _trajectory(query: Query, walk: Path) -> List[Tuple[int, Optional[int], object, Tuple[int, ...]]]:
    """Step-by-step configurations along a validated walk."""
    by_tid = {t.tid: t for t in query.vass.transitions}
    rows = [(0, None, query.start.state, query.start.location)]
    cfg = query.start
    for i, tid in enumerate(walk, start=1):
        t = by_tid[tid]
        cfg = Configuration(t.dst, tuple(x + d for x, d in zip(cfg.location, t.disp)))
        rows.append((i, tid, cfg.state, cfg.location))
    return rows


def write_report_dir(record: ReportRecord, query: Query, outdir) -> List[FsPath]:
    """Write the delimited report plus figures; returns the file list."""
    out = FsPath(outdir)
    out.mkdir(parents=True, exist_ok=True)
    written: List[FsPath] = []

    report = out / "report.tsv"
    with report.open("w") as fh:
        fh.write("key\tvalue\n")
        fh.write(f"schema\t{record.schema_version}\n")
        fh.write(f"tool\tvassreach {record.tool_version}\n")
        fh.write(f"verdict\t{record.verdict}\n")
        fh.write(f"digest\t{record.digest}\n")
        fh.write(f"elapsed\t{record.elapsed:.6f}\n")
        fh.write(f"threads\t{record.threads}\n")
        for k, v in _budget_pairs(record.budget):
            fh.write(f"budget.{k}\t{v}\n")
        s = record.stats
        fh.write(f"stats.nodes\t{s.nodes}\n")
        fh.write(f"stats.leaves\t{s.leaves}\n")
        fh.write(f"stats.max_depth\t{s.max_depth}\n")
        fh.write(f"stats.max_cgs_size\t{s.max_cgs_size}\n")
        fh.write(f"stats.partial\t{int(s.partial)}\n")
        for k, v in sorted(s.steps.items()):
            fh.write(f"steps.{k}\t{v}\n")
        for reason in record.detail:
            fh.write(f"open\t{reason}\n")
        if record.walk is not None:
            fh.write("walk\t" + " ".join(str(t) for t in record.walk) + "\n")
    written.append(report)

    # figures want a non-interactive backend; keep the import local so the
    # library can be used without matplotlib configured for display
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    steps = sorted(record.stats.steps.items())
    if steps:
        ax.bar([k for k, _ in steps], [v for _, v in steps], color="#4878a8")
    ax.set_ylabel("steps")
    ax.set_title(f"refinement steps — {record.verdict}")
    ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    steps_png = out / "steps.png"
    fig.savefig(steps_png, dpi=120)
    plt.close(fig)
    written.append(steps_png)

    if record.walk is not None:
        rows = _trajectory(query, record.walk)
        end = validate_walk(query.vass, query.start, record.walk)
        assert end == query.target

        walk_tsv = out / "walk.tsv"
        dim = query.vass.dim
        with walk_tsv.open("w") as fh:
            fh.write("step\ttid\tstate\t" + "\t".join(f"x{i}" for i in range(dim)) + "\n")
            for i, tid, state, loc in rows:
                tid_s = "" if tid is None else str(tid)
                fh.write(f"{i}\t{tid_s}\t{state}\t" + "\t".join(map(str, loc)) + "\n")
        written.append(walk_tsv)

        fig, ax = plt.subplots(figsize=(6, 3.5))
        xs = [r[0] for r in rows]
        for i in range(dim):
            ax.plot(xs, [r[3][i] for r in rows], marker="o", markersize=3,
                    label=f"x{i}")
        ax.set_xlabel("step")
        ax.set_ylabel("coordinate")
        ax.set_title("witness trajectory")
        ax.legend(loc="best", fontsize=8)
        fig.tight_layout()
        traj_png = out / "trajectory.png"
        fig.savefig(traj_png, dpi=120)
        plt.close(fig)
        written.append(traj_png)

    return written
