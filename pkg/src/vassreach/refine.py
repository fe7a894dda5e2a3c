"""Refinement operations on constraint graph sequences.

Each operation replaces one component of a sequence by a refining
subsequence: every origin path the child admits, the parent admits.  The
transformations are pure — callers own their branches and no state is
shared.  Operations return ``None`` (or an empty tuple) when the requested
branch is provably dead, and raise :class:`VassError` on misuse of the
preconditions.

Chain extraction comes in two flavours.  Support restriction
(:func:`eulerian_simplify`) is *exact*: the surviving graph must condense
to a single chain that uses every component and every crossing edge,
because a walk whose footprint is exactly the support always induces such
a chain — anything else admits no walk with that footprint and the branch
dies.  Counter products (:func:`combinatorial_children`) instead route
around a DAG, so there we enumerate every simple chain through the
condensation and the caller branches over them.
"""

from __future__ import annotations

import random
from collections import Counter, deque
from dataclasses import dataclass
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from .core import (
    Cg,
    Cgs,
    Connector,
    Path,
    SideConstraint,
    State,
    Transition,
    Vass,
    VassError,
    Vec,
    admits,
    strongly_connected_components,
    zero,
)
from .charsys import CharSolution, build_char_system, satisfiable
from .diophantine import BudgetExceeded
from .geometry import geometric_dimension, orthogonal_indices
from .witness import build_witness_system, solve_witness_system, state_offsets

# Caps for the enumerating variants; exceeding one raises BudgetExceeded so
# the caller can taint the branch rather than silently drop children.
ARRANGEMENT_CAP = 512
CHAIN_CAP = 512
RIDGE_VALUE_CAP = 64

STEP_KINDS = (
    "eulerian",
    "orthogonal",
    "ridge",
    "algebraic",
    "combinatorial",
    "twodim",
)


@dataclass(frozen=True)
class RefinementStep:
    """One recorded transformation, kept for auditing a search branch."""

    kind: str
    comp: int
    params: Tuple
    parent: Cgs
    child: Cgs
    parent_dim: int
    child_dims: Tuple[int, ...]


def record_step(kind: str, parent: Cgs, comp: int, params: Iterable, child: Cgs) -> RefinementStep:
    """Build a step record and assert the dimension bookkeeping on it.

    Algebraic and combinatorial steps must strictly lower the geometric
    dimension of every non-trivial component carved out of the refined one.
    """
    if kind not in STEP_KINDS:
        raise VassError(f"unknown refinement kind {kind!r}")
    parent_dim = geometric_dimension(parent.components[comp].graph)
    spread = len(child.components) - len(parent.components) + 1
    assert spread >= 1, "child lost components outside the refined slot"
    child_dims = tuple(
        geometric_dimension(child.components[comp + t].graph) for t in range(spread)
    )
    if kind in ("algebraic", "combinatorial"):
        for t, d in enumerate(child_dims):
            if child.components[comp + t].graph.transitions:
                assert d < parent_dim, (
                    f"{kind} step failed to lower dimension: part {t} has {d}, parent {parent_dim}"
                )
    return RefinementStep(kind, comp, tuple(params), parent, child, parent_dim, child_dims)


# --- chain extraction -----------------------------------------------------

def _part_cg(dim: int, scc: Sequence[State], edges: Sequence[Transition], entry: State, exit: State) -> Cg:
    graph = Vass(
        dim,
        tuple(sorted(scc, key=repr)),
        tuple(sorted(edges, key=lambda t: t.tid)),
    )
    return Cg(graph, entry, exit)


def _chain_candidates(
    dim: int,
    states: Iterable[State],
    edges: Sequence[Transition],
    entry: State,
    exit: State,
    exact: bool,
    limit: Optional[int] = None,
    cap: Optional[int] = None,
) -> List[Tuple[List[Cg], List[Connector]]]:
    """Chains through the SCC condensation of ``(states, edges)``.

    ``exact`` demands one chain covering every SCC with every crossing edge
    used exactly once (unique when it exists).  Otherwise all simple chains
    from the entry SCC to the exit SCC are produced, choosing one crossing
    edge per hop; ``limit`` truncates quietly, ``cap`` raises when the
    family is larger.
    """
    order = list(reversed(strongly_connected_components(tuple(states), tuple(edges))))
    scc_of: Dict[State, int] = {}
    for idx, scc in enumerate(order):
        for s in scc:
            scc_of[s] = idx
    inner: List[List[Transition]] = [[] for _ in order]
    crossing: Dict[Tuple[int, int], List[Transition]] = {}
    for t in edges:
        u, v = scc_of[t.src], scc_of[t.dst]
        if u == v:
            inner[u].append(t)
        else:
            crossing.setdefault((u, v), []).append(t)
    for lst in crossing.values():
        lst.sort(key=lambda t: t.tid)

    def assemble(path: Sequence[int], hops: Sequence[Transition]) -> Tuple[List[Cg], List[Connector]]:
        parts: List[Cg] = []
        for pos, idx in enumerate(path):
            ent = entry if pos == 0 else hops[pos - 1].dst
            ex = exit if pos == len(path) - 1 else hops[pos].src
            parts.append(_part_cg(dim, order[idx], inner[idx], ent, ex))
        return parts, [Connector(t.disp, t.origin) for t in hops]

    if exact:
        # Tarjan's order is already topological once reversed; a chain over
        # all SCCs must follow it, with exactly one crossing edge per hop
        # and none elsewhere.
        m = len(order)
        if scc_of.get(entry) != 0 or scc_of.get(exit) != m - 1:
            return []
        hops: List[Transition] = []
        for t in range(m - 1):
            here = crossing.get((t, t + 1), [])
            if len(here) != 1:
                return []
            hops.append(here[0])
        if len(crossing) != m - 1:
            return []
        return [assemble(list(range(m)), hops)]

    if scc_of.get(entry) is None or scc_of.get(exit) is None:
        return []
    succ: Dict[int, List[int]] = {}
    for (u, v) in crossing:
        succ.setdefault(u, []).append(v)
    for lst in succ.values():
        lst.sort()
    target = scc_of[exit]
    found: List[Tuple[List[Cg], List[Connector]]] = []
    path = [scc_of[entry]]
    hops: List[Transition] = []

    def dfs() -> bool:
        if path[-1] == target:
            found.append(assemble(path, hops))
            if limit is not None and len(found) >= limit:
                return True
            if cap is not None and len(found) > cap:
                raise BudgetExceeded(f"more than {cap} chain decompositions")
        for nxt in succ.get(path[-1], []):
            if nxt in path:
                continue
            for t in crossing[(path[-1], nxt)]:
                path.append(nxt)
                hops.append(t)
                if dfs():
                    return True
                hops.pop()
                path.pop()
        return False

    dfs()
    return found


def _splice(cgs: Cgs, j: int, parts: Sequence[Cg], conns: Sequence[Connector]) -> Cgs:
    """Replace component ``j`` by the chain ``parts`` joined by ``conns``.

    Side constraints on the replaced component follow its boundary: entry
    constraints move to the first part, exit constraints to the last.
    """
    assert len(conns) == len(parts) - 1
    comps = cgs.components[:j] + tuple(parts) + cgs.components[j + 1 :]
    connectors = cgs.connectors[:j] + tuple(conns) + cgs.connectors[j:]
    shift = len(parts) - 1
    scs = []
    for sc in cgs.side_constraints:
        if sc.comp < j:
            scs.append(sc)
        elif sc.comp > j:
            scs.append(SideConstraint(sc.comp + shift, sc.role, sc.index, sc.bound))
        elif sc.role == "entry":
            scs.append(SideConstraint(j, sc.role, sc.index, sc.bound))
        else:
            scs.append(SideConstraint(j + shift, sc.role, sc.index, sc.bound))
    return Cgs(comps, connectors, tuple(scs), cgs.boundary)


# --- support restriction --------------------------------------------------

def eulerian_simplify(cgs: Cgs, j: int, support: Iterable[int]) -> Optional[Cgs]:
    """Restrict component ``j`` to the transitions in ``support``.

    The remainder must condense into a single entry-to-exit chain using
    every SCC and every crossing edge once — the shape any walk with this
    exact footprint induces.  Crossing edges become connectors, so the
    child never grows.  ``None`` means no walk has this footprint.
    """
    comp = cgs.components[j]
    sup = frozenset(support)
    known = {t.tid for t in comp.graph.transitions}
    if not sup <= known:
        raise VassError("support names transitions outside the component")
    edges = [t for t in comp.graph.transitions if t.tid in sup]
    states: Set[State] = {comp.entry, comp.exit}
    for t in edges:
        states.add(t.src)
        states.add(t.dst)
    chains = _chain_candidates(cgs.dim, states, edges, comp.entry, comp.exit, exact=True)
    if not chains:
        return None
    parts, conns = chains[0]
    child = _splice(cgs, j, parts, conns)
    assert child.size() <= cgs.size(), "support restriction grew the sequence"
    return child


# --- orthogonal value propagation ------------------------------------------

def orthogonal_simplify(cgs: Cgs, j: int, i: int, entry_value: int) -> Optional[Cgs]:
    """Pin the entry value of an orthogonal index on component ``j``.

    Orthogonality makes the index's value at each state path-independent,
    so every state carries ``entry_value`` plus a fixed offset.  Small
    values: states forced negative are deleted and the remainder is
    re-chained (first chain when several routes survive).  Values beyond
    ``|Q|·‖T‖`` keep every state safe, so only a strict lower bound on the
    entry is recorded.
    """
    comp = cgs.components[j]
    if i not in orthogonal_indices(comp.graph):
        raise VassError("index is not orthogonal on this component")
    big = len(comp.graph.states) * comp.graph.max_norm()
    if entry_value > big:
        sc = SideConstraint(j, "entry", i, big)
        if sc in cgs.side_constraints:
            return cgs
        scs = tuple(
            sorted(
                set(cgs.side_constraints) | {sc},
                key=lambda s: (s.comp, s.role, s.index, s.bound),
            )
        )
        return Cgs(cgs.components, cgs.connectors, scs, cgs.boundary)
    offs = state_offsets(comp.graph, comp.entry)
    vals = {s: entry_value + off[i] for s, off in offs.items()}
    for t in comp.graph.transitions:
        assert vals[t.src] + t.disp[i] == vals[t.dst], "value propagation conflict"
    keep = {s for s, v in vals.items() if v >= 0}
    if comp.entry not in keep or comp.exit not in keep:
        return None
    edges = [t for t in comp.graph.transitions if t.src in keep and t.dst in keep]
    states: Set[State] = {comp.entry, comp.exit}
    for t in edges:
        states.add(t.src)
        states.add(t.dst)
    chains = _chain_candidates(
        cgs.dim, states, edges, comp.entry, comp.exit, exact=False, limit=1
    )
    if not chains:
        return None
    parts, conns = chains[0]
    child = _splice(cgs, j, parts, conns)
    assert child.size() <= cgs.size(), "deletion grew the sequence"
    return child


# --- counter products -------------------------------------------------------

def _counter_product(comp: Cg, i: int, bound: int) -> Tuple[List[State], List[Transition]]:
    states: List[State] = [(q, c) for q in comp.graph.states for c in range(bound + 1)]
    trans: List[Transition] = []
    tid = 0
    for t in sorted(comp.graph.transitions, key=lambda t: t.tid):
        for c in range(bound + 1):
            c2 = c + t.disp[i]
            if 0 <= c2 <= bound:
                trans.append(Transition(tid, (t.src, c), (t.dst, c2), t.disp, t.origin))
                tid += 1
    return states, trans


def ridge_construction(
    cg: Cg, i: int, bound: int, entry_val: int, exit_val: int
) -> Optional[Cg]:
    """Track index ``i`` in the state, making it orthogonal.

    States become ``(q, c)`` with the counter ``c`` in ``[0, bound]``
    updated by each displacement; runs leaving the window are cut off.  The
    result is restricted to the SCC containing both boundary states (the
    strong-connectedness repair the sequence form requires); ``None`` when
    they fall into different SCCs.
    """
    if bound < 0:
        raise VassError("counter bound must be nonnegative")
    if not (0 <= entry_val <= bound and 0 <= exit_val <= bound):
        raise VassError("boundary value outside the counter window")
    states, trans = _counter_product(cg, i, bound)
    entry = (cg.entry, entry_val)
    exit = (cg.exit, exit_val)
    home = None
    for scc in strongly_connected_components(tuple(states), tuple(trans)):
        if entry in scc:
            home = set(scc)
            break
    assert home is not None
    if exit not in home:
        return None
    edges = [t for t in trans if t.src in home and t.dst in home]
    graph = Vass(cg.graph.dim, tuple(sorted(home, key=repr)), tuple(edges))
    out = Cg(graph, entry, exit)
    assert i in orthogonal_indices(graph), "counter product left the index live"
    return out


def combinatorial_bound(comp: Cg, entry_norm: int, cap: int = RIDGE_VALUE_CAP) -> Tuple[int, bool]:
    """Counter window for a ridge product, clamped to ``cap``.

    The untruncated window is A^(1+D^D) with A = entry_norm + 2^(size+1)+1;
    the boolean reports whether the clamp bit, in which case dead branches
    may be cut early and the caller must not report definite unreachability.
    """
    size = len(comp.graph.states) + len(comp.graph.transitions)
    a = entry_norm + (1 << (size + 1)) + 1
    d = comp.graph.dim
    expo = 1 + d**d
    # avoid materializing astronomically large powers just to compare
    if expo * max(1, a.bit_length() - 1) > max(70, cap.bit_length() + 1):
        return cap, True
    theory = a**expo
    if theory > cap:
        return cap, True
    return theory, False


def combinatorial_children(
    cgs: Cgs,
    j: int,
    i: int,
    bound: int,
    entry_val: int,
    exit_val: int,
    cap: int = CHAIN_CAP,
) -> Tuple[Cgs, ...]:
    """Every chain decomposition of the counter product of component ``j``.

    The product is restricted to states on some entry-to-exit route, then
    each simple chain through its condensation yields one child; children
    are deduplicated structurally.  Raises BudgetExceeded past ``cap``.
    """
    comp = cgs.components[j]
    if i in orthogonal_indices(comp.graph):
        raise VassError("index is already orthogonal; nothing to unfold")
    if not (0 <= entry_val <= bound and 0 <= exit_val <= bound):
        raise VassError("boundary value outside the counter window")
    states, trans = _counter_product(comp, i, bound)
    entry = (comp.entry, entry_val)
    exit = (comp.exit, exit_val)
    fwd = _closure(entry, trans, forward=True)
    bwd = _closure(exit, trans, forward=False)
    keep = fwd & bwd
    if entry not in keep or exit not in keep:
        return ()
    edges = [t for t in trans if t.src in keep and t.dst in keep]
    chains = _chain_candidates(cgs.dim, keep, edges, entry, exit, exact=False, cap=cap)
    parent_dim = geometric_dimension(comp.graph)
    kids: List[Cgs] = []
    seen = set()
    for parts, conns in chains:
        for part in parts:
            if part.graph.transitions:
                assert geometric_dimension(part.graph) < parent_dim
        child = _splice(cgs, j, parts, conns)
        key = child.canonical_key()
        if key not in seen:
            seen.add(key)
            kids.append(child)
    return tuple(kids)


def combinatorial_decompose(
    cgs: Cgs, j: int, i: int, bound: int, entry_val: int, exit_val: int
) -> Optional[Cgs]:
    """First chain decomposition of the counter product (canonical order).

    Branch-complete callers should iterate :func:`combinatorial_children`
    instead; this single-child form mirrors one nondeterministic guess.
    """
    comp = cgs.components[j]
    if i in orthogonal_indices(comp.graph):
        raise VassError("index is already orthogonal; nothing to unfold")
    if not (0 <= entry_val <= bound and 0 <= exit_val <= bound):
        raise VassError("boundary value outside the counter window")
    states, trans = _counter_product(comp, i, bound)
    entry = (comp.entry, entry_val)
    exit = (comp.exit, exit_val)
    fwd = _closure(entry, trans, forward=True)
    bwd = _closure(exit, trans, forward=False)
    keep = fwd & bwd
    if entry not in keep or exit not in keep:
        return None
    edges = [t for t in trans if t.src in keep and t.dst in keep]
    chains = _chain_candidates(
        cgs.dim, keep, edges, entry, exit, exact=False, limit=1
    )
    if not chains:
        return None
    parts, conns = chains[0]
    parent_dim = geometric_dimension(comp.graph)
    for part in parts:
        if part.graph.transitions:
            assert geometric_dimension(part.graph) < parent_dim
    return _splice(cgs, j, parts, conns)


def _closure(start: State, trans: Sequence[Transition], forward: bool) -> Set[State]:
    adj: Dict[State, List[State]] = {}
    for t in trans:
        if forward:
            adj.setdefault(t.src, []).append(t.dst)
        else:
            adj.setdefault(t.dst, []).append(t.src)
    seen = {start}
    todo = deque([start])
    while todo:
        s = todo.popleft()
        for nxt in adj.get(s, ()):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return seen


# --- bounded-edge decomposition ---------------------------------------------

def algebraic_arrangements(
    cgs: Cgs, j: int, multiplicities: Mapping[int, int], cap: int = ARRANGEMENT_CAP
) -> Tuple[Tuple[int, ...], ...]:
    """Endpoint-consistent orders of the bounded-edge occurrence multiset.

    ``multiplicities`` maps each bounded transition id of component ``j``
    to its forced count.  An order is consistent when consecutive
    occurrence endpoints (and the component boundary) coincide or share an
    SCC of the unbounded remainder.  Lexicographic by transition id;
    raises BudgetExceeded past ``cap``.
    """
    comp = cgs.components[j]
    mult = {tid: n for tid, n in multiplicities.items() if n > 0}
    if not mult:
        raise VassError("no bounded occurrence to arrange")
    known = {t.tid for t in comp.graph.transitions}
    if not set(mult) <= known:
        raise VassError("multiplicities name transitions outside the component")
    scc_of = _unbounded_sccs(comp, set(mult))[0]

    def linked(frm: State, to: State) -> bool:
        if frm == to:
            return True
        u, v = scc_of.get(frm), scc_of.get(to)
        return u is not None and u == v

    out: List[Tuple[int, ...]] = []
    seq: List[int] = []
    rem = dict(mult)

    def dfs(anchor: State) -> None:
        if not any(rem.values()):
            if linked(anchor, comp.exit):
                out.append(tuple(seq))
                if len(out) > cap:
                    raise BudgetExceeded(f"more than {cap} arrangements")
            return
        for tid in sorted(rem):
            if rem[tid] == 0:
                continue
            t = comp.graph.by_tid(tid)
            if not linked(anchor, t.src):
                continue
            rem[tid] -= 1
            seq.append(tid)
            dfs(t.dst)
            seq.pop()
            rem[tid] += 1

    dfs(comp.entry)
    return tuple(out)


def _unbounded_sccs(
    comp: Cg, bounded: Set[int]
) -> Tuple[Dict[State, int], List[List[State]], List[List[Transition]]]:
    unb = [t for t in comp.graph.transitions if t.tid not in bounded]
    states = sorted({x for t in unb for x in (t.src, t.dst)}, key=repr)
    members = strongly_connected_components(tuple(states), tuple(unb))
    scc_of: Dict[State, int] = {}
    for idx, scc in enumerate(members):
        for s in scc:
            scc_of[s] = idx
    inner: List[List[Transition]] = [[] for _ in members]
    for t in unb:
        if scc_of[t.src] == scc_of[t.dst]:
            inner[scc_of[t.src]].append(t)
    return scc_of, members, inner


def algebraic_decompose(
    cgs: Cgs, j: int, m: CharSolution, arrangement: Sequence[int]
) -> Optional[Cgs]:
    """Unfold component ``j`` along one order of its bounded edges.

    Each bounded occurrence becomes a connector; the stretches between
    consecutive occurrences become fresh copies of the unbounded-remainder
    SCC both endpoints share (or a lone state when they coincide outside
    any SCC).  ``None`` when the order strands two endpoints apart.
    """
    comp = cgs.components[j]
    arr = tuple(arrangement)
    if not arr:
        raise VassError("empty arrangement: component has no bounded occurrence")
    for tid, n in Counter(arr).items():
        if m.psi_of(j, tid) != n:
            raise VassError("arrangement multiplicities disagree with the solution")
    scc_of, members, inner = _unbounded_sccs(comp, set(arr))
    hops = [comp.graph.by_tid(t) for t in arr]
    anchors = [(comp.entry, hops[0].src)]
    anchors += [(hops[t].dst, hops[t + 1].src) for t in range(len(hops) - 1)]
    anchors.append((hops[-1].dst, comp.exit))
    parent_dim = geometric_dimension(comp.graph)
    parts: List[Cg] = []
    for occ, (ent, ex) in enumerate(anchors):
        u, v = scc_of.get(ent), scc_of.get(ex)
        if u is not None and u == v:
            rename = {s: (occ, s) for s in members[u]}
            graph = Vass(
                cgs.dim,
                tuple(sorted(rename.values(), key=repr)),
                tuple(
                    Transition(t.tid, rename[t.src], rename[t.dst], t.disp, t.origin)
                    for t in sorted(inner[u], key=lambda t: t.tid)
                ),
            )
            assert geometric_dimension(graph) < parent_dim
            parts.append(Cg(graph, rename[ent], rename[ex]))
        elif ent == ex:
            parts.append(Cg(Vass(cgs.dim, ((occ, ent),), ()), (occ, ent), (occ, ent)))
        else:
            return None
    conns = [Connector(t.disp, t.origin) for t in hops]
    return _splice(cgs, j, parts, conns)


# --- flat component replacement ----------------------------------------------

@dataclass(frozen=True)
class TwoDimBudget:
    """Search budget for replacing a geometrically flat component."""

    border: int = 64
    max_cycles: int = 3
    max_skeleton: int = 5
    max_cycle_len: int = 6

    def __post_init__(self):
        if self.border < 1:
            raise VassError("candidate border must be positive")
        if min(self.max_cycles, self.max_skeleton, self.max_cycle_len) < 0:
            raise VassError("budget lengths must be nonnegative")


@dataclass(frozen=True)
class Replaced:
    cgs: Cgs


@dataclass(frozen=True)
class NotFound:
    tried: int = 0


def _anchored_cycles(graph: Vass, home: State, max_len: int) -> Tuple[Tuple[Transition, ...], ...]:
    """Simple cycles through ``home`` up to ``max_len`` edges, anchored there.

    Anchoring fixes the rotation, so each cycle shows up exactly once.
    """
    out: List[Tuple[Transition, ...]] = []
    eds: List[Transition] = []
    visited = {home}

    def dfs(cur: State) -> None:
        for t in sorted(graph.out_edges(cur), key=lambda t: t.tid):
            if len(eds) + 1 > max_len:
                break
            if t.dst == home:
                out.append(tuple(eds) + (t,))
            elif t.dst not in visited:
                visited.add(t.dst)
                eds.append(t)
                dfs(t.dst)
                eds.pop()
                visited.discard(t.dst)

    dfs(home)
    return tuple(out)


def _simple_paths(
    graph: Vass, a: State, b: State, max_len: int
) -> List[Tuple[Tuple[State, ...], Tuple[Transition, ...]]]:
    found: List[Tuple[Tuple[State, ...], Tuple[Transition, ...]]] = []
    sts: List[State] = [a]
    eds: List[Transition] = []

    def dfs(cur: State) -> None:
        if cur == b:
            found.append((tuple(sts), tuple(eds)))
        if len(eds) >= max_len:
            return
        for t in sorted(graph.out_edges(cur), key=lambda t: t.tid):
            if t.dst in sts:
                continue
            sts.append(t.dst)
            eds.append(t)
            dfs(t.dst)
            eds.pop()
            sts.pop()

    dfs(a)
    found.sort(key=lambda pe: (len(pe[1]), tuple(t.tid for t in pe[1])))
    return found


def _stack_assignments(
    anchors: Sequence[State],
    total: int,
    cycles_at: Dict[State, Tuple[Tuple[Transition, ...], ...]],
) -> Iterator[Tuple[Tuple[Tuple[Transition, ...], ...], ...]]:
    """Ways to pile ``total`` cycles onto the skeleton positions, in order."""

    def rec(pos: int, left: int, acc: List[Tuple[Tuple[Transition, ...], ...]]):
        if pos == len(anchors):
            if left == 0:
                yield tuple(acc)
            return
        pool = cycles_at[anchors[pos]]
        remaining = len(anchors) - pos - 1
        for take in range(0, left + 1):
            if take and not pool:
                break
            if remaining == 0 and take != left:
                continue
            for stack in _tuples(pool, take):
                acc.append(stack)
                yield from rec(pos + 1, left - take, acc)
                acc.pop()

    yield from rec(0, total, [])


def _tuples(pool: Sequence, k: int) -> Iterator[Tuple]:
    if k == 0:
        yield ()
        return
    for head in pool:
        for tail in _tuples(pool, k - 1):
            yield (head,) + tail


def two_dim_replacements(cgs: Cgs, j: int, budget: TwoDimBudget) -> Iterator[Cgs]:
    """Linear-shape refinements of component ``j``, smallest first.

    Candidates stack cycles of the component's graph onto a simple
    entry-to-exit skeleton path; stacked cycles at one state are joined by
    silent connectors.  Deduplicated structurally; at most ``border``
    candidates are produced.
    """
    comp = cgs.components[j]
    graph = comp.graph
    skeletons = _simple_paths(graph, comp.entry, comp.exit, budget.max_skeleton)
    cycles_at: Dict[State, Tuple[Tuple[Transition, ...], ...]] = {}
    for sts, _ in skeletons:
        for s in sts:
            if s not in cycles_at:
                cycles_at[s] = _anchored_cycles(graph, s, budget.max_cycle_len)
    seen = set()
    produced = 0
    silent = Connector(zero(cgs.dim), -1)
    for total in range(budget.max_cycles + 1):
        for sts, eds in skeletons:
            for stacks in _stack_assignments(sts, total, cycles_at):
                parts: List[Cg] = []
                conns: List[Connector] = []
                for pos, s in enumerate(sts):
                    if pos > 0:
                        conns.append(Connector(eds[pos - 1].disp, eds[pos - 1].origin))
                    stack = stacks[pos]
                    if not stack:
                        parts.append(Cg(Vass(cgs.dim, (s,), ()), s, s))
                        continue
                    for rank, cyc in enumerate(stack):
                        if rank > 0:
                            conns.append(silent)
                        ring_states = tuple(
                            sorted({x for t in cyc for x in (t.src, t.dst)}, key=repr)
                        )
                        ring = Vass(cgs.dim, ring_states, tuple(cyc))
                        parts.append(Cg(ring, s, s))
                child = _splice(cgs, j, parts, conns)
                key = child.canonical_key()
                if key in seen:
                    continue
                seen.add(key)
                yield child
                produced += 1
                if produced >= budget.border:
                    return


def _screen(child: Cgs) -> bool:
    a = b = None
    if child.boundary is not None:
        a, b = child.boundary
    if a is not None and all(c.is_linear_piece() for c in child.components):
        try:
            return solve_witness_system(build_witness_system(child, a, b)).status == "sat"
        except BudgetExceeded:
            return False
    try:
        return satisfiable(build_char_system(child, a, b)).status == "sat"
    except BudgetExceeded:
        return False


def replace_2d_component(
    cgs: Cgs, j: int, budget: TwoDimBudget = TwoDimBudget()
) -> Union[Replaced, NotFound]:
    """Swap a geometrically flat component for a linear-shape refinement.

    Returns the first candidate whose instance-level system is satisfiable
    (the exact lap system when the whole child is linear and a boundary is
    pinned, the counting relaxation otherwise).  ``NotFound`` only says the
    budget ran out — it is never evidence of unreachability.
    """
    comp = cgs.components[j]
    if geometric_dimension(comp.graph) > 2:
        raise VassError("component is not geometrically flat")
    tried = 0
    for child in two_dim_replacements(cgs, j, budget):
        tried += 1
        if _screen(child):
            return Replaced(child)
    return NotFound(tried)


# --- sampling check -----------------------------------------------------------

def _shortest_edge_path(graph: Vass, a: State, b: State) -> Optional[List[Transition]]:
    if a == b:
        return []
    prev: Dict[State, Transition] = {}
    seen = {a}
    todo = deque([a])
    while todo:
        s = todo.popleft()
        for t in sorted(graph.out_edges(s), key=lambda t: t.tid):
            if t.dst in seen:
                continue
            seen.add(t.dst)
            prev[t.dst] = t
            if t.dst == b:
                out: List[Transition] = []
                cur = b
                while cur != a:
                    out.append(prev[cur])
                    cur = prev[cur].src
                out.reverse()
                return out
            todo.append(t.dst)
    return None


def _random_inner_word(comp: Cg, rng: random.Random) -> Optional[List[int]]:
    if comp.trivial:
        return []
    word: List[Transition] = []
    s = comp.entry
    wander = 2 * (len(comp.graph.states) + len(comp.graph.transitions)) + rng.randrange(8)
    for _ in range(wander):
        if s == comp.exit and rng.random() < 0.35:
            return [t.origin for t in word]
        outs = sorted(comp.graph.out_edges(s), key=lambda t: t.tid)
        if not outs:
            break
        t = rng.choice(outs)
        word.append(t)
        s = t.dst
    tail = _shortest_edge_path(comp.graph, s, comp.exit)
    if tail is None:
        return None
    return [t.origin for t in word + tail]


def sample_admitted_path(cgs: Cgs, rng: random.Random) -> Optional[Path]:
    """One random origin path the sequence admits, or ``None`` if stuck."""
    out: List[int] = []
    for j, comp in enumerate(cgs.components):
        word = _random_inner_word(comp, rng)
        if word is None:
            return None
        out.extend(word)
        if j < len(cgs.connectors) and cgs.connectors[j].origin >= 0:
            out.append(cgs.connectors[j].origin)
    path = tuple(out)
    assert admits(cgs, path), "sampler produced a path its own sequence rejects"
    return path


def refines_sample_check(child: Cgs, parent: Cgs, samples: int, seed: int = 0) -> bool:
    """Randomized audit that every sampled child path is admitted by the parent."""
    rng = random.Random(seed)
    for _ in range(samples):
        path = sample_admitted_path(child, rng)
        if path is None:
            continue
        if not admits(parent, path):
            return False
    return True
