"""Characteristic systems of constraint graph sequences.

A traversal of a CGS (a witness passing every edge of every component) is
abstracted by per-component entry/exit locations x_j, y_j and transition
counts psi_j.  These satisfy flow balance inside each component, the
displacement ledger x_j + disp(psi_j) = y_j, the connector chaining
y_{j-1} + t_j = x_j, boundary pinning, and strict positivity of all
counts.  The homogeneous variant zeroes the boundary and the constants and
drops positivity; its Hilbert basis spans the directions in which
traversals can grow, which is what the boundedness analysis reads off.

Side constraints (strict lower bounds on single boundary entries) compile
into shifted variable lower bounds, the same encoding used for strict
positivity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from . import geometry
from .core import Cgs, Vec, vadd, vscale, zero
from .diophantine import (
    BudgetExceeded,
    IntMatrix,
    hilbert_basis,
    minimal_solutions,
)

Vector = Tuple[int, ...]


@dataclass(frozen=True)
class CharSystem:
    """Assembled linear system over the component variables of a CGS."""

    cgs: Cgs
    matrix: IntMatrix
    rhs: Vector
    lower_bounds: Vector
    homogeneous: bool
    positivity: bool
    # Variable layout bookkeeping: per component, offsets of x, y and the
    # psi block (keyed by transition id in tid order).
    x_offsets: Tuple[int, ...]
    y_offsets: Tuple[int, ...]
    psi_offsets: Tuple[Dict[int, int], ...]

    @property
    def num_vars(self) -> int:
        return self.matrix.cols


@dataclass(frozen=True)
class CharSolution:
    """Structured view of one assignment: boundary vectors and counts."""

    entry: Tuple[Vec, ...]
    exit: Tuple[Vec, ...]
    psi: Tuple[Dict[int, int], ...]
    raw: Vector

    def psi_of(self, comp: int, tid: int) -> int:
        return self.psi[comp].get(tid, 0)

    def total_norm(self) -> int:
        return sum(self.raw)


@dataclass(frozen=True)
class SatResult:
    status: str  # "sat", "unsat" or "budget"
    solution: Optional[CharSolution] = None


@dataclass(frozen=True)
class BoundednessReport:
    """Classification read off the aggregate homogeneous solution."""

    aggregate: CharSolution
    unbounded_edges: Tuple[frozenset, ...]
    bounded_edges: Tuple[frozenset, ...]
    entry_unbounded: Tuple[frozenset, ...]
    exit_unbounded: Tuple[frozenset, ...]
    component_bounded: Tuple[bool, ...]
    orthogonal: Tuple[Tuple[int, ...], ...]
    iota_entry: Tuple[frozenset, ...]
    iota_exit: Tuple[frozenset, ...]


def build_char_system(
    cgs: Cgs,
    a: Optional[Vec] = None,
    b: Optional[Vec] = None,
    positivity: bool = True,
    homogeneous: bool = False,
) -> CharSystem:
    """Assemble the characteristic system of ``a (cgs) b``.

    With ``homogeneous=True`` the boundary is pinned to zero, connector
    displacements are dropped, and positivity is never imposed.
    """
    dim = cgs.dim
    if homogeneous:
        a = zero(dim)
        b = zero(dim)
        positivity = False
    if a is None or b is None:
        if cgs.boundary is None:
            raise ValueError("boundary required: pass a and b or set cgs.boundary")
        a, b = cgs.boundary
    if len(a) != dim or len(b) != dim:
        raise ValueError("boundary dimension mismatch")

    x_offsets: List[int] = []
    y_offsets: List[int] = []
    psi_offsets: List[Dict[int, int]] = []
    cursor = 0
    for comp in cgs.components:
        x_offsets.append(cursor)
        cursor += dim
        y_offsets.append(cursor)
        cursor += dim
        block: Dict[int, int] = {}
        for t in sorted(comp.graph.transitions, key=lambda t: t.tid):
            block[t.tid] = cursor
            cursor += 1
        psi_offsets.append(block)
    nvars = cursor

    rows: List[List[int]] = []
    rhs: List[int] = []

    def new_row() -> List[int]:
        return [0] * nvars

    for j, comp in enumerate(cgs.components):
        # Flow balance at every state of the component.
        for s in comp.graph.states:
            row = new_row()
            touched = False
            for t in comp.graph.transitions:
                col = psi_offsets[j][t.tid]
                if t.dst == s:
                    row[col] += 1
                    touched = True
                if t.src == s:
                    row[col] -= 1
                    touched = True
            want = 0
            if not homogeneous:
                want = (1 if s == comp.exit else 0) - (1 if s == comp.entry else 0)
            if touched or want != 0:
                rows.append(row)
                rhs.append(want)
        # Displacement ledger: x_j + disp(psi_j) - y_j = 0.
        for i in range(dim):
            row = new_row()
            row[x_offsets[j] + i] = 1
            row[y_offsets[j] + i] = -1
            for t in comp.graph.transitions:
                row[psi_offsets[j][t.tid]] = t.disp[i]
            rows.append(row)
            rhs.append(0)
    # Connector chaining: y_{j-1} + t_j = x_j.
    for j, conn in enumerate(cgs.connectors):
        for i in range(dim):
            row = new_row()
            row[y_offsets[j] + i] = 1
            row[x_offsets[j + 1] + i] = -1
            rows.append(row)
            rhs.append(0 if homogeneous else -conn.disp[i])
    # Boundary pinning.
    for i in range(dim):
        row = new_row()
        row[x_offsets[0] + i] = 1
        rows.append(row)
        rhs.append(a[i])
    last = len(cgs.components) - 1
    for i in range(dim):
        row = new_row()
        row[y_offsets[last] + i] = 1
        rows.append(row)
        rhs.append(b[i])

    lower = [0] * nvars
    if positivity:
        for block in psi_offsets:
            for col in block.values():
                lower[col] = 1
    if not homogeneous:
        for sc in cgs.side_constraints:
            base = x_offsets[sc.comp] if sc.role == "entry" else y_offsets[sc.comp]
            col = base + sc.index
            lower[col] = max(lower[col], sc.bound + 1)

    return CharSystem(
        cgs=cgs,
        matrix=IntMatrix.from_rows(rows),
        rhs=tuple(rhs),
        lower_bounds=tuple(lower),
        homogeneous=homogeneous,
        positivity=positivity,
        x_offsets=tuple(x_offsets),
        y_offsets=tuple(y_offsets),
        psi_offsets=tuple(psi_offsets),
    )


def decode(sys: CharSystem, raw: Sequence[int]) -> CharSolution:
    dim = sys.cgs.dim
    entries = []
    exits = []
    psis = []
    for j in range(len(sys.cgs.components)):
        xo, yo = sys.x_offsets[j], sys.y_offsets[j]
        entries.append(tuple(raw[xo : xo + dim]))
        exits.append(tuple(raw[yo : yo + dim]))
        psis.append({tid: raw[col] for tid, col in sys.psi_offsets[j].items()})
    return CharSolution(tuple(entries), tuple(exits), tuple(psis), tuple(raw))


def minimal_char_solutions(
    sys: CharSystem, budget: Optional[int] = None
) -> Tuple[CharSolution, ...]:
    vecs = minimal_solutions(sys.matrix, sys.rhs, sys.lower_bounds, budget=budget)
    return tuple(decode(sys, v) for v in vecs)


def satisfiable(sys: CharSystem, budget: Optional[int] = None) -> SatResult:
    """Sat with one (minimal) solution, definitive Unsat, or Budget."""
    try:
        sols = minimal_char_solutions(sys, budget=budget)
    except BudgetExceeded:
        return SatResult("budget")
    if not sols:
        return SatResult("unsat")
    return SatResult("sat", sols[0])


def homogeneous_basis(
    cgs: Cgs, budget: Optional[int] = None
) -> Tuple[CharSolution, ...]:
    """Hilbert basis of the homogeneous characteristic system."""
    sys = build_char_system(cgs, homogeneous=True)
    vecs = hilbert_basis(sys.matrix, budget=budget)
    return tuple(decode(sys, v) for v in vecs)


def aggregate_solution(
    cgs: Cgs,
    budget: Optional[int] = None,
    basis: Optional[Sequence[CharSolution]] = None,
) -> CharSolution:
    """Sum of the homogeneous Hilbert basis; zero when the basis is empty.

    An entry or count is unbounded over the solutions of the
    characteristic system exactly when it is positive here.  Callers that
    already hold the basis can pass it to skip recomputation.
    """
    sys = build_char_system(cgs, homogeneous=True)
    if basis is None:
        vecs: Sequence[Sequence[int]] = hilbert_basis(sys.matrix, budget=budget)
    else:
        vecs = [sol.raw for sol in basis]
    total = [0] * sys.num_vars
    for v in vecs:
        for i, x in enumerate(v):
            total[i] += x
    return decode(sys, total)


def classify(
    cgs: Cgs,
    budget: Optional[int] = None,
    basis: Optional[Sequence[CharSolution]] = None,
) -> BoundednessReport:
    """Boundedness report for every component of the sequence."""
    agg = aggregate_solution(cgs, budget=budget, basis=basis)
    dim = cgs.dim
    unbounded_edges = []
    bounded_edges = []
    entry_unb = []
    exit_unb = []
    comp_bounded = []
    orthos = []
    iota_in = []
    iota_out = []
    for j, comp in enumerate(cgs.components):
        tids = {t.tid for t in comp.graph.transitions}
        unb = frozenset(t for t in tids if agg.psi_of(j, t) > 0)
        unbounded_edges.append(unb)
        bounded_edges.append(frozenset(tids - unb))
        entry_unb.append(frozenset(i for i in range(dim) if agg.entry[j][i] > 0))
        exit_unb.append(frozenset(i for i in range(dim) if agg.exit[j][i] > 0))
        comp_bounded.append(len(tids - unb) > 0)
        orth = geometry.orthogonal_indices(comp.graph)
        orthos.append(orth)
        orth_set = set(orth)
        iota_in.append(
            frozenset(
                i
                for i in range(dim)
                if agg.entry[j][i] == 0 and i not in orth_set
            )
        )
        iota_out.append(
            frozenset(
                i
                for i in range(dim)
                if agg.exit[j][i] == 0 and i not in orth_set
            )
        )
    return BoundednessReport(
        aggregate=agg,
        unbounded_edges=tuple(unbounded_edges),
        bounded_edges=tuple(bounded_edges),
        entry_unbounded=tuple(entry_unb),
        exit_unbounded=tuple(exit_unb),
        component_bounded=tuple(comp_bounded),
        orthogonal=tuple(orthos),
        iota_entry=tuple(iota_in),
        iota_exit=tuple(iota_out),
    )
