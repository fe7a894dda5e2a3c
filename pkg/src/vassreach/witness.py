"""Witness machinery: pump cycles, normality, lap systems, synthesis.

Three jobs live here.  ``check_pumpable`` decides whether a component can
raise a set of coordinates by an arbitrary amount via a cycle at its
entry (or lower them at its exit, running time backwards), deciding with
a coverability tree and then extracting a concrete certificate cycle by
bounded search.  ``solve_witness_system`` handles sequences whose
components are all linear pieces exactly: lap counts are the only
unknowns and within-lap locations are linear in the lap index, so
endpoint constraints capture walk validity precisely.  ``is_normal`` and
``synthesize_witness`` implement the positive direction for mixed
sequences: when some minimal solution makes every component either a
realizable linear piece or pumpable at both ends, a valid walk is
assembled from pump cycles, Euler runs of the solution counts, and
compensating cycles — and then validated step by step, so a returned
walk is always genuine.
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

from .core import (
    Cg,
    Cgs,
    Path,
    State,
    Transition,
    Vass,
    Vec,
    VassError,
    admits,
    realize_parikh,
    vadd,
    vscale,
    zero,
)
from .charsys import (
    BoundednessReport,
    CharSolution,
    build_char_system,
    classify,
    minimal_char_solutions,
)
from .diophantine import BudgetExceeded
from . import intfeas

PUMP_NODE_BUDGET = 20_000
CERT_NODE_BUDGET = 200_000


def reverse_graph(g: Vass) -> Vass:
    """Same transition ids, arrows flipped and displacements negated."""
    return Vass(
        g.dim,
        g.states,
        tuple(
            Transition(t.tid, t.dst, t.src, vscale(-1, t.disp), t.origin)
            for t in g.transitions
        ),
    )


def cycle_word(cg: Cg) -> Path:
    """Edge sequence of a circular component, anchored at its entry."""
    assert cg.is_circular()
    word: List[int] = []
    s = cg.entry
    while True:
        outs = cg.graph.out_edges(s)
        assert len(outs) == 1
        word.append(outs[0].tid)
        s = outs[0].dst
        if s == cg.entry:
            return tuple(word)


def state_offsets(graph: Vass, entry: State) -> Dict[State, Vec]:
    """Displacement of some path from the entry to each state.

    Only meaningful on coordinates every cycle of the graph leaves
    untouched, where the value is path-independent.
    """
    offs: Dict[State, Vec] = {entry: zero(graph.dim)}
    todo = deque([entry])
    while todo:
        s = todo.popleft()
        for t in sorted(graph.out_edges(s), key=lambda t: t.tid):
            if t.dst not in offs:
                offs[t.dst] = vadd(offs[s], t.disp)
                todo.append(t.dst)
    return offs


# --- pumpability ---------------------------------------------------------

@dataclass(frozen=True)
class PumpCertificate:
    """A cycle that shifts the guarded coordinates strictly in one
    direction while never dropping them below zero along the way.

    ``cycle`` is always spelled in forward orientation: a closed edge
    word at the component's entry (forward) or exit (backward).  For the
    backward direction the guarantee is time-reversed — positioned so the
    cycle *ends* on ``base``, it never dips below zero and its
    displacement is at most -1 on every guarded coordinate.
    """

    direction: str  # "forward" or "backward"
    cycle: Path
    indices: Tuple[int, ...]
    gain: Vec  # displacement of the cycle, full dimension


@dataclass(frozen=True)
class Pumpable:
    cert: PumpCertificate


@dataclass(frozen=True)
class NotPumpable:
    """Witness of failure: coordinate ``index`` never exceeds ``bound`` on
    any admissible walk from the probed configuration (projected to the
    probed coordinates).  ``bounds`` lists every coordinate that admits
    such a cap; when no coordinate does, ``index`` is None and the caller
    must treat the result as unusable for range-restriction."""

    index: Optional[int]
    bound: Optional[int]
    bounds: Tuple[Tuple[int, int], ...] = ()


@dataclass(frozen=True)
class Budget:
    detail: str = ""


def _proj(vec: Vec, indices: Sequence[int]) -> Tuple[int, ...]:
    return tuple(vec[i] for i in indices)


def _covers(v, w) -> bool:
    return all(x is None or (y is not None and x >= y) for x, y in zip(v, w))


def _km_tree(graph: Vass, home: State, base: Tuple[int, ...], indices: Sequence[int], node_cap: int):
    """Coverability tree of the projected system, with acceleration.

    The classical construction: children are accelerated against strictly
    dominated ancestors, and a branch stops when it repeats an ancestor
    exactly.  Returns (covered, nodes) where covered says some node at
    ``home`` strictly dominates ``base`` in every probed coordinate.
    """
    target = tuple(x + 1 for x in base)
    nodes: List[Tuple[State, Tuple[Optional[int], ...], Optional[int]]] = [
        (home, tuple(base), None)
    ]
    queue = deque([0])
    while queue:
        nid = queue.popleft()
        state, val, _ = nodes[nid]
        for t in sorted(graph.out_edges(state), key=lambda t: t.tid):
            new: List[Optional[int]] = list(val)
            ok = True
            for pos, i in enumerate(indices):
                if new[pos] is None:
                    continue
                new[pos] += t.disp[i]
                if new[pos] < 0:
                    ok = False
                    break
            if not ok:
                continue
            # Accelerate against strictly dominated ancestors; an
            # acceleration can unlock another, so iterate to a fixpoint.
            changed = True
            while changed:
                changed = False
                anc: Optional[int] = nid
                while anc is not None:
                    astate, aval, aparent = nodes[anc]
                    if astate == t.dst and _covers(tuple(new), aval) and tuple(new) != aval:
                        for pos in range(len(indices)):
                            if (
                                new[pos] is not None
                                and aval[pos] is not None
                                and new[pos] > aval[pos]
                            ):
                                new[pos] = None
                                changed = True
                    anc = aparent
            grown = tuple(new)
            if t.dst == home and _covers(grown, target):
                return True, nodes
            repeat = False
            anc = nid
            while anc is not None:
                astate, aval, aparent = nodes[anc]
                if astate == t.dst and aval == grown:
                    repeat = True
                    break
                anc = aparent
            if repeat:
                continue
            nodes.append((t.dst, grown, nid))
            if len(nodes) > node_cap:
                raise BudgetExceeded("coverability tree exceeded node budget")
            queue.append(len(nodes) - 1)
    return False, nodes


def _shortest_cycle(graph: Vass, home: State) -> Path:
    """Shortest cycle through ``home``, ignoring counter values."""
    parent: Dict[State, Tuple[State, int]] = {}
    todo = deque([home])
    seen = {home}
    while todo:
        s = todo.popleft()
        for t in sorted(graph.out_edges(s), key=lambda t: t.tid):
            if t.dst == home:
                path = [t.tid]
                cur = s
                while cur != home:
                    p, tid = parent[cur]
                    path.append(tid)
                    cur = p
                return tuple(reversed(path))
            if t.dst not in seen:
                seen.add(t.dst)
                parent[t.dst] = (s, t.tid)
                todo.append(t.dst)
    raise VassError(f"no cycle through {home}")


def _bounded_cert(
    graph: Vass,
    home: State,
    base: Tuple[int, ...],
    indices: Sequence[int],
    value_cap: int,
    node_cap: int,
) -> Optional[Path]:
    """Concrete pump cycle by breadth-first search with capped values."""
    target = tuple(x + 1 for x in base)
    start = (home, tuple(base))
    parent: Dict[Tuple[State, Tuple[int, ...]], Tuple[Tuple[State, Tuple[int, ...]], int]] = {}
    seen: Set[Tuple[State, Tuple[int, ...]]] = {start}
    todo = deque([start])
    budget = node_cap
    while todo:
        node = todo.popleft()
        state, val = node
        for t in sorted(graph.out_edges(state), key=lambda t: t.tid):
            new = tuple(v + t.disp[i] for v, i in zip(val, indices))
            if any(x < 0 for x in new) or any(x > value_cap for x in new):
                continue
            child = (t.dst, new)
            if child in seen:
                continue
            seen.add(child)
            parent[child] = (node, t.tid)
            if t.dst == home and all(x >= y for x, y in zip(new, target)):
                path: List[int] = []
                cur = child
                while cur != start:
                    cur, tid = parent[cur]
                    path.append(tid)
                return tuple(reversed(path))
            budget -= 1
            if budget < 0:
                return None
            todo.append(child)
    return None


def verify_pump_certificate(cg: Cg, cert: PumpCertificate, base: Vec) -> bool:
    """Replay a pump certificate against its component.

    Forward: the cycle closes at the entry, every prefix keeps the
    guarded coordinates of ``base`` nonnegative, and the displacement is
    at least +1 on each of them.  Backward: the same with the cycle
    anchored at the exit and time running in reverse from ``base``.
    """
    graph = cg.graph
    anchor = cg.entry if cert.direction == "forward" else cg.exit
    if not cert.cycle:
        return not cert.indices
    s = anchor
    disps = []
    for tid in cert.cycle:
        t = graph.by_tid(tid)
        if t.src != s:
            return False
        disps.append(t.disp)
        s = t.dst
    if s != anchor:
        return False
    total = zero(graph.dim)
    for d in disps:
        total = vadd(total, d)
    if total != cert.gain:
        return False
    if cert.direction == "forward":
        if any(total[i] < 1 for i in cert.indices):
            return False
        vals = list(base)
        for d in disps:
            for i in cert.indices:
                vals[i] += d[i]
                if vals[i] < 0:
                    return False
        return True
    if any(total[i] > -1 for i in cert.indices):
        return False
    vals = list(base)
    for d in reversed(disps):
        for i in cert.indices:
            vals[i] -= d[i]
            if vals[i] < 0:
                return False
    return True


def check_pumpable(
    cg: Cg,
    direction: str,
    indices: Sequence[int],
    base: Vec,
    node_cap: int = PUMP_NODE_BUDGET,
    cert_cap: int = CERT_NODE_BUDGET,
) -> Union[Pumpable, NotPumpable, Budget]:
    """Can a cycle at the component's entry raise every guarded
    coordinate (forward), or a cycle at its exit have lowered them into
    ``base`` (backward), keeping them nonnegative throughout?

    Returns Pumpable with a certificate cycle, NotPumpable carrying a
    certified cap on some guarded coordinate, or Budget when the decision
    or the certificate search blows its node allowance.
    """
    assert direction in ("forward", "backward")
    idx = tuple(sorted(indices))
    if direction == "forward":
        graph, home = cg.graph, cg.entry
    else:
        graph, home = reverse_graph(cg.graph), cg.exit

    def make_cert(word: Path) -> PumpCertificate:
        cycle = word if direction == "forward" else tuple(reversed(word))
        gain = zero(cg.graph.dim)
        for tid in cycle:
            gain = vadd(gain, cg.graph.by_tid(tid).disp)
        cert = PumpCertificate(direction, cycle, idx, gain)
        assert verify_pump_certificate(cg, cert, base), "pump cycle failed replay"
        return cert

    if not idx:
        return Pumpable(make_cert(_shortest_cycle(graph, home)))
    proj = _proj(base, idx)
    try:
        covered, nodes = _km_tree(graph, home, proj, idx, node_cap)
    except BudgetExceeded as e:
        return Budget(str(e))
    if covered:
        cap = max(proj) + graph.max_norm() * len(graph.states) + 2
        for _ in range(8):
            walk = _bounded_cert(graph, home, proj, idx, cap, cert_cap)
            if walk is not None:
                return Pumpable(make_cert(walk))
            cap *= 2
        return Budget("pump certificate search exceeded its caps")
    bounds = []
    for pos, i in enumerate(idx):
        vals = [n[1][pos] for n in nodes]
        if all(v is not None for v in vals):
            bounds.append((i, max(vals)))
    if not bounds:
        return NotPumpable(None, None, ())
    index, bound = min(bounds, key=lambda ib: (ib[1], ib[0]))
    return NotPumpable(index, bound, tuple(bounds))


# --- exact lap systems for fully linear sequences ------------------------

@dataclass
class WitnessSystem:
    """Linear constraints over lap counts of a fully linear sequence.

    Locations inside lap ``t`` of a cycle are affine in ``t``, so first
    and last laps bound every lap; the system is therefore an exact
    characterization of walk validity, not a relaxation.
    """

    cgs: Cgs
    a: Vec
    b: Vec
    cycle_comps: Tuple[int, ...]
    words: Dict[int, Path]
    eq_rows: List[List[int]]
    eq_rhs: List[int]
    ineq_rows: List[List[int]]
    ineq_rhs: List[int]

    @property
    def num_vars(self) -> int:
        return len(self.cycle_comps)


@dataclass
class WitnessOutcome:
    status: str  # "sat", "unsat" or "budget"
    path: Optional[Path] = None  # origin ids, validated
    counts: Optional[Tuple[int, ...]] = None


def _delta_and_min(graph: Vass, word: Path) -> Tuple[Vec, Vec]:
    acc = zero(graph.dim)
    low = None
    for tid in word:
        acc = vadd(acc, graph.by_tid(tid).disp)
        low = acc if low is None else tuple(min(x, y) for x, y in zip(low, acc))
    return acc, (low if low is not None else zero(graph.dim))


def build_witness_system(cgs: Cgs, a: Vec, b: Vec) -> WitnessSystem:
    assert all(c.is_linear_piece() for c in cgs.components), "not a linear sequence"
    dim = cgs.dim
    if len(a) != dim or len(b) != dim:
        raise VassError("boundary dimension mismatch")
    cycle_comps = [j for j, c in enumerate(cgs.components) if not c.trivial]
    words = {j: cycle_word(cgs.components[j]) for j in cycle_comps}
    nvars = len(cycle_comps)
    var_of = {j: v for v, j in enumerate(cycle_comps)}

    # Entry location of each component as const + coeffs . laps.
    const = list(a)
    coeff = [[0] * nvars for _ in range(dim)]
    eq_rows: List[List[int]] = []
    eq_rhs: List[int] = []
    ineq_rows: List[List[int]] = []
    ineq_rhs: List[int] = []

    def emit_ge(row_coeff: List[int], rhs: int) -> None:
        ineq_rows.append(list(row_coeff))
        ineq_rhs.append(rhs)

    entry_exprs: List[Tuple[List[int], List[List[int]]]] = []
    exit_exprs: List[Tuple[List[int], List[List[int]]]] = []
    for j, comp in enumerate(cgs.components):
        entry_exprs.append(([*const], [list(r) for r in coeff]))
        for i in range(dim):
            emit_ge(coeff[i], -const[i])  # entry location >= 0
        if not comp.trivial:
            word = words[j]
            delta, dmin = _delta_and_min(comp.graph, word)
            v = var_of[j]
            for i in range(dim):
                # First lap stays up: pos + dmin >= 0.
                emit_ge(coeff[i], -const[i] - dmin[i])
                # Last lap stays up: pos + (laps-1) delta + dmin >= 0.
                row = list(coeff[i])
                row[v] += delta[i]
                emit_ge(row, -const[i] - dmin[i] + delta[i])
            row = [0] * nvars
            row[v] = 1
            emit_ge(row, 1)  # at least one lap
            for i in range(dim):
                coeff[i][v] += delta[i]
        exit_exprs.append(([*const], [list(r) for r in coeff]))
        if j < len(cgs.connectors):
            for i in range(dim):
                const[i] += cgs.connectors[j].disp[i]

    for sc in cgs.side_constraints:
        c0, cf = (entry_exprs if sc.role == "entry" else exit_exprs)[sc.comp]
        emit_ge(cf[sc.index], sc.bound + 1 - c0[sc.index])

    for i in range(dim):
        eq_rows.append(list(coeff[i]))
        eq_rhs.append(b[i] - const[i])

    return WitnessSystem(
        cgs=cgs,
        a=a,
        b=b,
        cycle_comps=tuple(cycle_comps),
        words=words,
        eq_rows=eq_rows,
        eq_rhs=eq_rhs,
        ineq_rows=ineq_rows,
        ineq_rhs=ineq_rhs,
    )


def expand_counts(sys: WitnessSystem, counts: Sequence[int]) -> Path:
    """Origin-id path the lap counts describe."""
    laps = dict(zip(sys.cycle_comps, counts))
    out: List[int] = []
    for j, comp in enumerate(sys.cgs.components):
        if not comp.trivial:
            word = sys.words[j]
            for _ in range(laps[j]):
                for tid in word:
                    out.append(comp.graph.by_tid(tid).origin)
        if j < len(sys.cgs.connectors) and sys.cgs.connectors[j].origin >= 0:
            out.append(sys.cgs.connectors[j].origin)
    return tuple(out)


def _simulate(sys: WitnessSystem, counts: Sequence[int]) -> bool:
    laps = dict(zip(sys.cycle_comps, counts))
    loc = list(sys.a)

    def step(disp: Vec) -> bool:
        for i, d in enumerate(disp):
            loc[i] += d
            if loc[i] < 0:
                return False
        return True

    for j, comp in enumerate(sys.cgs.components):
        if not comp.trivial:
            word = sys.words[j]
            disps = [comp.graph.by_tid(t).disp for t in word]
            for _ in range(laps[j]):
                for d in disps:
                    if not step(d):
                        return False
        if j < len(sys.cgs.connectors):
            if not step(sys.cgs.connectors[j].disp):
                return False
    return tuple(loc) == sys.b


def solve_witness_system(
    sys: WitnessSystem,
    window: int = 4096,
    candidate_cap: int = 500_000,
) -> WitnessOutcome:
    """Exact lap counts for a fully linear sequence, or a definitive no.

    "unsat" is only reported when the count region was fully enumerated
    (bounded); truncated searches come back as "budget"."""
    res = intfeas.solve_linear(
        sys.eq_rows,
        sys.eq_rhs,
        sys.ineq_rows,
        sys.ineq_rhs,
        sys.num_vars,
        window=window,
        candidate_cap=candidate_cap,
    )
    if res.status != "sat":
        return WitnessOutcome(res.status)
    counts = res.point
    assert counts is not None
    assert _simulate(sys, counts), "lap system admitted an invalid walk"
    return WitnessOutcome("sat", expand_counts(sys, counts), counts)


# --- normality ------------------------------------------------------------

@dataclass(frozen=True)
class IsLcgs:
    comp: int
    alpha_star: int = 0  # least uplift making every lap safe


@dataclass(frozen=True)
class UnboundedAndPumpable:
    comp: int
    forward: PumpCertificate
    backward: PumpCertificate


CompVerdict = Union[IsLcgs, UnboundedAndPumpable]


@dataclass(frozen=True)
class NormalityCertificate:
    """One verdict per component, all anchored to one minimal solution."""

    solution: CharSolution
    verdicts: Tuple[CompVerdict, ...]
    alpha_star: int = 0


@dataclass(frozen=True)
class Normal:
    cert: NormalityCertificate


@dataclass(frozen=True)
class NotNormal:
    comp: Optional[int]
    reason: str


@dataclass
class ComponentCheck:
    """Per-component diagnosis of one minimal solution (driver fodder)."""

    comp: int
    kind: str  # "lcgs", "pumped", "failed" or "budget"
    reason: str = ""
    forward: Optional[PumpCertificate] = None
    backward: Optional[PumpCertificate] = None
    alpha_star: int = 0
    index: Optional[int] = None  # offending coordinate, when one exists
    detail: Optional[NotPumpable] = None


@dataclass
class SolutionCheck:
    ok: bool
    budget: bool
    checks: Tuple[ComponentCheck, ...]
    certificate: Optional[NormalityCertificate] = None


def _linear_alpha_star(
    comp: Cg,
    xn: Vec,
    yn: Vec,
    tn: int,
    xo: Vec,
    yo: Vec,
) -> Tuple[Optional[int], Optional[int]]:
    """Least uplift making every lap of a circular component safe.

    First-lap slack grows with the entry uplift, last-lap slack with the
    exit uplift; both slopes are nonnegative, so feasibility at one point
    means feasibility from there on.  Returns (alpha, None) on success
    and (None, coordinate) when no uplift can help.
    """
    word = cycle_word(comp)
    delta, dmin = _delta_and_min(comp.graph, word)
    assert tn >= 1, "positivity should force at least one lap"
    best = 0
    for i in range(comp.graph.dim):
        for const, slope in (
            (xn[i] + dmin[i], xo[i]),
            (yn[i] + dmin[i] - delta[i], yo[i]),
        ):
            if const >= 0:
                continue
            if slope <= 0:
                return None, i
            need = (-const + slope - 1) // slope
            best = max(best, need)
    return best, None


def _common_count(comp: Cg, psi: Dict[int, int]) -> int:
    counts = {psi.get(t.tid, 0) for t in comp.graph.transitions}
    assert len(counts) == 1, "cycle counts must agree around a circular component"
    return counts.pop()


def evaluate_solution(
    cgs: Cgs,
    sol: CharSolution,
    report: BoundednessReport,
    node_cap: int = PUMP_NODE_BUDGET,
    cert_cap: int = CERT_NODE_BUDGET,
) -> SolutionCheck:
    """Check whether one minimal solution is realizable by pumping.

    Every component must be a linear piece whose laps can be made safe by
    a uniform uplift, or an unbounded component pumpable forward at its
    entry values and backward at its exit values (on the bounded,
    non-orthogonal coordinates), with orthogonal coordinates that are
    bounded at the entry already safe at every state.
    """
    checks: List[ComponentCheck] = []
    verdicts: List[CompVerdict] = []
    ok = True
    saw_budget = False
    alpha = 0
    agg = report.aggregate
    for j, comp in enumerate(cgs.components):
        xn, yn = sol.entry[j], sol.exit[j]
        xo, yo = agg.entry[j], agg.exit[j]
        if comp.trivial:
            checks.append(ComponentCheck(j, "lcgs"))
            verdicts.append(IsLcgs(j))
            continue
        if comp.is_linear_piece():
            tn = _common_count(comp, sol.psi[j])
            a_star, bad = _linear_alpha_star(comp, xn, yn, tn, xo, yo)
            if a_star is None:
                checks.append(
                    ComponentCheck(j, "failed", reason="lap-threshold", index=bad)
                )
                ok = False
                continue
            checks.append(ComponentCheck(j, "lcgs", alpha_star=a_star))
            verdicts.append(IsLcgs(j, a_star))
            alpha = max(alpha, a_star)
            continue
        if report.component_bounded[j]:
            checks.append(ComponentCheck(j, "failed", reason="bounded-not-linear"))
            ok = False
            continue
        # Orthogonal coordinates bounded at the entry admit no uplift, so
        # their value at every state is forced; all must stay nonnegative.
        offs = state_offsets(comp.graph, comp.entry)
        bad = None
        for i in report.orthogonal[j]:
            if xo[i] > 0:
                continue
            for s in comp.graph.states:
                if xn[i] + offs[s][i] < 0:
                    bad = i
                    break
            if bad is not None:
                break
        if bad is not None:
            checks.append(
                ComponentCheck(j, "failed", reason="orthogonal-unsafe", index=bad)
            )
            ok = False
            continue
        fwd = check_pumpable(
            comp, "forward", sorted(report.iota_entry[j]), xn, node_cap, cert_cap
        )
        if isinstance(fwd, Budget):
            checks.append(ComponentCheck(j, "budget", reason=fwd.detail))
            ok = False
            saw_budget = True
            continue
        if isinstance(fwd, NotPumpable):
            checks.append(
                ComponentCheck(j, "failed", reason="not-pumpable-forward", detail=fwd)
            )
            ok = False
            continue
        bwd = check_pumpable(
            comp, "backward", sorted(report.iota_exit[j]), yn, node_cap, cert_cap
        )
        if isinstance(bwd, Budget):
            checks.append(ComponentCheck(j, "budget", reason=bwd.detail))
            ok = False
            saw_budget = True
            continue
        if isinstance(bwd, NotPumpable):
            checks.append(
                ComponentCheck(j, "failed", reason="not-pumpable-backward", detail=bwd)
            )
            ok = False
            continue
        checks.append(
            ComponentCheck(j, "pumped", forward=fwd.cert, backward=bwd.cert)
        )
        verdicts.append(UnboundedAndPumpable(j, fwd.cert, bwd.cert))
    certificate = None
    if ok:
        certificate = NormalityCertificate(sol, tuple(verdicts), alpha)
    return SolutionCheck(ok, saw_budget, tuple(checks), certificate)


def is_normal(
    cgs: Cgs,
    a: Vec,
    b: Vec,
    node_cap: int = PUMP_NODE_BUDGET,
    cert_cap: int = CERT_NODE_BUDGET,
    dio_budget: Optional[int] = None,
) -> Union[Normal, NotNormal, Budget]:
    """Search the minimal solutions for one that is realizable by pumping.

    Unsatisfiable instances are not normal.  A Budget outcome means some
    sub-decision (solution enumeration or a pumpability query) was
    truncated, so the negative cannot be trusted.
    """
    sys = build_char_system(cgs, a, b)
    try:
        sols = minimal_char_solutions(sys, budget=dio_budget)
    except BudgetExceeded as e:
        return Budget(str(e))
    if not sols:
        return NotNormal(None, "unsatisfiable")
    try:
        report = classify(cgs, budget=dio_budget)
    except BudgetExceeded as e:
        return Budget(str(e))
    saw_budget = False
    first_fail: Optional[Tuple[Optional[int], str]] = None
    for sol in sols:
        chk = evaluate_solution(cgs, sol, report, node_cap, cert_cap)
        if chk.ok:
            assert chk.certificate is not None
            return Normal(chk.certificate)
        saw_budget = saw_budget or chk.budget
        if first_fail is None:
            bad = next(c for c in chk.checks if c.kind in ("failed", "budget"))
            first_fail = (bad.comp, bad.reason)
    if saw_budget:
        return Budget("pumpability check truncated")
    assert first_fail is not None
    return NotNormal(*first_fail)


# --- synthesis ------------------------------------------------------------

SYNTH_ROUNDS = 8
SYNTH_LENGTH_CAP = 4_000_000


def _anchored_rotation(graph: Vass, word: Path, anchor: State, r: int) -> Path:
    """Rotate a closed edge word to another visit of its anchor state."""
    if not word or r == 0:
        return word
    cuts = [0]
    s = anchor
    for pos, tid in enumerate(word):
        s = graph.by_tid(tid).dst
        if s == anchor and pos + 1 < len(word):
            cuts.append(pos + 1)
    cut = cuts[r % len(cuts)]
    return word[cut:] + word[:cut]


def _scaled(psi: Dict[int, int], c: int) -> Dict[int, int]:
    return {tid: cnt * c for tid, cnt in psi.items() if cnt * c != 0}


class _Abort(Exception):
    pass


def synthesize_witness(cgs: Cgs, cert: NormalityCertificate, rounds: int = SYNTH_ROUNDS) -> Path:
    """Assemble and validate a walk witnessing a normality certificate.

    The walk realizes the counts ``n + alpha * aggregate`` per component:
    pump cycles raise the guarded coordinates, an Euler run spends the
    solution counts, compensating cycles return the pump surplus, and the
    backward pump descends onto the exit values.  Every candidate is
    simulated exactly; parameters double and cycle anchors rotate until
    one candidate validates.
    """
    sol = cert.solution
    a, b = sol.entry[0], sol.exit[-1]
    report = classify(cgs)
    agg = report.aggregate
    assert len(cert.verdicts) == len(cgs.components), "certificate must cover all components"
    maxnorm = max((c.graph.max_norm() for c in cgs.components), default=0)
    if cgs.connectors:
        maxnorm = max(maxnorm, *(max(map(abs, c.disp), default=0) for c in cgs.connectors))

    by_comp: Dict[int, CompVerdict] = {v.comp: v for v in cert.verdicts}
    pumped: Dict[int, Tuple[Path, Path, int]] = {}  # j -> fwd word, bwd word, C
    for v in cert.verdicts:
        if not isinstance(v, UnboundedAndPumpable):
            continue
        j = v.comp
        fwd = v.forward.cycle
        bwd = v.backward.cycle  # already in forward orientation
        need = Counter(fwd) + Counter(bwd)
        c_j = 1
        for tid, cnt in need.items():
            avail = agg.psi_of(j, tid)
            assert avail > 0, "pumped component must have unbounded edges only"
            c_j = max(c_j, -(-(cnt + 1) // avail))
        pumped[j] = (fwd, bwd, c_j)

    sizes = sum(
        sum(sol.psi[j].values()) + sum(agg.psi[j].values())
        for j in range(len(cgs.components))
    )
    l_base = maxnorm * (sizes + 1) + max([*a, *b, 1]) + 1

    for s_round in range(rounds):
        big_l = l_base << s_round
        alpha = max(
            cert.alpha_star,
            max((2 * big_l * c for (_, _, c) in pumped.values()), default=0),
            1,
        ) + s_round * l_base
        for rot in range(4):
            for order in ("pump-first", "spread-first"):
                try:
                    path = _assemble(
                        cgs, sol, agg, by_comp, pumped, a, b, alpha, big_l, rot, order
                    )
                except _Abort:
                    continue
                if path is not None:
                    assert admits(cgs, path), "synthesized walk not admitted"
                    return path
    raise AssertionError(
        "witness synthesis exhausted its retry schedule on a normal solution"
    )


def _assemble(
    cgs: Cgs,
    sol: CharSolution,
    agg: CharSolution,
    by_comp: Dict[int, CompVerdict],
    pumped: Dict[int, Tuple[Path, Path, int]],
    a: Vec,
    b: Vec,
    alpha: int,
    big_l: int,
    rot: int,
    order: str,
) -> Optional[Path]:
    loc = list(a)
    out: List[int] = []
    budget = [SYNTH_LENGTH_CAP]

    def run(graph: Vass, word: Sequence[int], reps: int = 1) -> None:
        if reps <= 0 or not word:
            return
        budget[0] -= reps * len(word)
        if budget[0] < 0:
            raise _Abort()
        disps = [graph.by_tid(t).disp for t in word]
        origins = [graph.by_tid(t).origin for t in word]
        for _ in range(reps):
            for d, o in zip(disps, origins):
                for i, x in enumerate(d):
                    loc[i] += x
                    if loc[i] < 0:
                        raise _Abort()
                out.append(o)

    for j, comp in enumerate(cgs.components):
        verdict = by_comp[j]
        if isinstance(verdict, IsLcgs) and not comp.trivial:
            word = cycle_word(comp)
            tn = _common_count(comp, sol.psi[j])
            to = _common_count(comp, agg.psi[j]) if agg.psi[j] else 0
            run(comp.graph, word, tn + alpha * to)
        elif isinstance(verdict, UnboundedAndPumpable):
            fwd, bwd, c_j = pumped[j]
            a_pad = alpha - 2 * big_l * c_j
            assert a_pad >= 0
            spread = realize_parikh(comp.graph, comp.entry, comp.entry, agg.psi[j])
            spread = _anchored_rotation(comp.graph, spread, comp.entry, rot)
            middle = realize_parikh(comp.graph, comp.entry, comp.exit, sol.psi[j])
            comp_counter = Counter(_scaled(agg.psi[j], c_j))
            comp_counter.subtract(Counter(fwd))
            comp_counter.subtract(Counter(bwd))
            assert all(v > 0 for v in comp_counter.values())
            refill = realize_parikh(comp.graph, comp.exit, comp.exit, comp_counter)
            refill = _anchored_rotation(comp.graph, refill, comp.exit, rot)
            if order == "pump-first":
                run(comp.graph, fwd, 2 * big_l)
                run(comp.graph, spread, a_pad)
            else:
                run(comp.graph, spread, a_pad)
                run(comp.graph, fwd, 2 * big_l)
            run(comp.graph, middle)
            run(comp.graph, refill, 2 * big_l)
            run(comp.graph, bwd, 2 * big_l)
        if j < len(cgs.connectors):
            conn = cgs.connectors[j]
            for i, x in enumerate(conn.disp):
                loc[i] += x
                if loc[i] < 0:
                    raise _Abort()
            if conn.origin >= 0:
                out.append(conn.origin)
    if tuple(loc) != b:
        raise _Abort()
    return tuple(out)
