"""Core data model: vector addition systems with states, configurations,
paths, Parikh images, and constraint graph sequences.

A VASS here is a labeled digraph whose transitions carry integer
displacement vectors.  Constraint graph sequences (CGS) chain strongly
connected components with entry/exit states and connecting transitions;
they are the objects the refinement pipeline rewrites.  Transitions carry
an ``origin`` id pointing back at the transition of the base system they
descend from, so paths admitted by derived sequences can be compared
against their ancestors.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

Vec = Tuple[int, ...]
State = Hashable
Path = Tuple[int, ...]


class VassError(Exception):
    pass


class WalkError(VassError):
    """A path left the first orthant.  ``step`` is the failing index."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"location went negative at step {step}")


class FlowImbalanceError(VassError):
    pass


class DisconnectedSupportError(VassError):
    pass


def vadd(a: Vec, b: Vec) -> Vec:
    return tuple(x + y for x, y in zip(a, b))


def vsub(a: Vec, b: Vec) -> Vec:
    return tuple(x - y for x, y in zip(a, b))


def vscale(c: int, a: Vec) -> Vec:
    return tuple(c * x for x in a)


def vmin(a: Vec, b: Vec) -> Vec:
    return tuple(min(x, y) for x, y in zip(a, b))


def zero(dim: int) -> Vec:
    return (0,) * dim


@dataclass(frozen=True)
class Transition:
    tid: int
    src: State
    dst: State
    disp: Vec
    origin: int = -1

    def __post_init__(self):
        if self.origin < 0:
            object.__setattr__(self, "origin", self.tid)


@dataclass(frozen=True)
class Vass:
    """Digraph with displacement-labeled transitions and stable ids."""

    dim: int
    states: Tuple[State, ...]
    transitions: Tuple[Transition, ...]

    def __post_init__(self):
        seen = set(self.states)
        if len(seen) != len(self.states):
            raise VassError("duplicate states")
        tids = set()
        for t in self.transitions:
            if t.src not in seen or t.dst not in seen:
                raise VassError(f"transition {t.tid} uses unknown state")
            if len(t.disp) != self.dim:
                raise VassError(f"transition {t.tid} has wrong dimension")
            if t.tid in tids:
                raise VassError(f"duplicate transition id {t.tid}")
            tids.add(t.tid)

    def by_tid(self, tid: int) -> Transition:
        for t in self.transitions:
            if t.tid == tid:
                return t
        raise KeyError(tid)

    def out_edges(self, s: State) -> List[Transition]:
        return [t for t in self.transitions if t.src == s]

    def max_norm(self) -> int:
        """Largest absolute displacement entry over all transitions."""
        best = 0
        for t in self.transitions:
            for x in t.disp:
                best = max(best, abs(x))
        return best


def make_vass(dim: int, states: Iterable[State], triples) -> Vass:
    """Build a Vass from (src, dst, disp) triples, assigning ids in order."""
    trans = tuple(
        Transition(i, s, d, tuple(v)) for i, (s, d, v) in enumerate(triples)
    )
    return Vass(dim, tuple(states), trans)


@dataclass(frozen=True)
class Configuration:
    state: State
    location: Vec

    def __post_init__(self):
        if any(x < 0 for x in self.location):
            raise VassError(f"negative location {self.location}")


ParikhImage = Counter


def parikh(path: Path) -> ParikhImage:
    """Multiset of transition ids used by a path."""
    return Counter(path)


def _check_chained(vass: Vass, path: Path) -> None:
    prev = None
    for tid in path:
        t = vass.by_tid(tid)
        if prev is not None and t.src != prev:
            raise VassError(f"path not chained at transition {tid}")
        prev = t.dst


def displacement(vass: Vass, path: Path) -> Vec:
    """Sum of displacements along a chained path."""
    _check_chained(vass, path)
    acc = zero(vass.dim)
    for tid in path:
        acc = vadd(acc, vass.by_tid(tid).disp)
    return acc


def parikh_displacement(vass: Vass, psi: Mapping[int, int]) -> Vec:
    acc = zero(vass.dim)
    for tid, cnt in psi.items():
        acc = vadd(acc, vscale(cnt, vass.by_tid(tid).disp))
    return acc


def delta_min(vass: Vass, path: Path) -> Vec:
    """Entrywise minimum over the nonempty prefix sums of a path.

    The empty path yields the zero vector, so ``start + delta_min >= 0``
    is exactly the walk condition for any start location.
    """
    _check_chained(vass, path)
    if not path:
        return zero(vass.dim)
    acc = zero(vass.dim)
    low: Optional[Vec] = None
    for tid in path:
        acc = vadd(acc, vass.by_tid(tid).disp)
        low = acc if low is None else vmin(low, acc)
    assert low is not None
    return low


def validate_walk(vass: Vass, start: Configuration, path: Path) -> Configuration:
    """Simulate a path from a configuration, requiring nonnegativity.

    Returns the final configuration; raises WalkError with the index of the
    first step that leaves the first orthant.
    """
    state = start.state
    loc = start.location
    for i, tid in enumerate(path, start=1):
        t = vass.by_tid(tid)
        if t.src != state:
            raise VassError(f"step {i}: transition {tid} does not start at {state}")
        loc = vadd(loc, t.disp)
        if any(x < 0 for x in loc):
            raise WalkError(i)
        state = t.dst
    return Configuration(state, loc)


def is_walk(vass: Vass, start: Configuration, path: Path) -> bool:
    try:
        validate_walk(vass, start, path)
        return True
    except WalkError:
        return False


def realize_parikh(vass: Vass, entry: State, exit: State, psi: Mapping[int, int]) -> Path:
    """Extract an entry-to-exit path using each transition exactly psi-many
    times (Euler path of the count multigraph).

    Ties are broken toward the lowest transition id, so the result is
    deterministic.  Raises FlowImbalanceError when the counts cannot chain
    between the endpoints, DisconnectedSupportError when the support does
    not hang together with the entry state.
    """
    counts: Dict[int, int] = {}
    for tid, cnt in psi.items():
        if cnt < 0:
            raise VassError(f"negative count for transition {tid}")
        if cnt > 0:
            counts[tid] = cnt
    flow: Dict[State, int] = {s: 0 for s in vass.states}
    for tid, cnt in counts.items():
        t = vass.by_tid(tid)
        flow[t.src] -= cnt
        flow[t.dst] += cnt
    for s in vass.states:
        want = (1 if s == exit else 0) - (1 if s == entry else 0)
        if flow[s] != want:
            raise FlowImbalanceError(f"flow imbalance at state {s}")
    if counts:
        # Undirected connectivity of the support, anchored at the entry.
        adj: Dict[State, Set[State]] = {}
        for tid in counts:
            t = vass.by_tid(tid)
            adj.setdefault(t.src, set()).add(t.dst)
            adj.setdefault(t.dst, set()).add(t.src)
        todo = [entry]
        seen = {entry}
        while todo:
            s = todo.pop()
            for nxt in adj.get(s, ()):
                if nxt not in seen:
                    seen.add(nxt)
                    todo.append(nxt)
        if any(s not in seen for s in adj):
            raise DisconnectedSupportError("support unreachable from entry")
    elif entry != exit:
        raise FlowImbalanceError("empty counts but entry differs from exit")

    out: Dict[State, List[Transition]] = {}
    for tid in counts:
        t = vass.by_tid(tid)
        out.setdefault(t.src, []).append(t)
    for lst in out.values():
        lst.sort(key=lambda t: t.tid)

    remaining = dict(counts)
    route: List[int] = []
    stack: List[Tuple[State, Optional[int]]] = [(entry, None)]
    while stack:
        s, via = stack[-1]
        nxt = None
        for t in out.get(s, ()):
            if remaining.get(t.tid, 0) > 0:
                nxt = t
                break
        if nxt is not None:
            remaining[nxt.tid] -= 1
            stack.append((nxt.dst, nxt.tid))
        else:
            stack.pop()
            if via is not None:
                route.append(via)
    route.reverse()
    assert len(route) == sum(counts.values()), "euler extraction incomplete"
    if route:
        assert vass.by_tid(route[-1]).dst == exit
    return tuple(route)


def strongly_connected_components(
    states: Sequence[State], transitions: Sequence[Transition]
) -> List[List[State]]:
    """Tarjan's algorithm, iterative.  Components come out in reverse
    topological order of the condensation."""
    adj: Dict[State, List[State]] = {s: [] for s in states}
    for t in transitions:
        adj[t.src].append(t.dst)
    index: Dict[State, int] = {}
    low: Dict[State, int] = {}
    on_stack: Set[State] = set()
    stack: List[State] = []
    result: List[List[State]] = []
    counter = [0]

    for root in states:
        if root in index:
            continue
        work: List[Tuple[State, int]] = [(root, 0)]
        while work:
            node, pi = work.pop()
            if pi == 0:
                index[node] = low[node] = counter[0]
                counter[0] += 1
                stack.append(node)
                on_stack.add(node)
            recurse = False
            succs = adj[node]
            while pi < len(succs):
                nxt = succs[pi]
                pi += 1
                if nxt not in index:
                    work.append((node, pi))
                    work.append((nxt, 0))
                    recurse = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if recurse:
                continue
            if low[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                result.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return result


def is_strongly_connected(states: Sequence[State], transitions: Sequence[Transition]) -> bool:
    if len(states) <= 1:
        return True
    comps = strongly_connected_components(states, transitions)
    return len(comps) == 1


@dataclass(frozen=True)
class Cg:
    """Strongly connected constraint graph with designated entry and exit."""

    graph: Vass
    entry: State
    exit: State

    def __post_init__(self):
        if self.entry not in self.graph.states or self.exit not in self.graph.states:
            raise VassError("entry/exit not in component graph")
        if not self.graph.transitions:
            # edgeless components are only the single-state trivial one
            if len(self.graph.states) > 1:
                raise VassError("edgeless component must have a single state")
        elif not is_strongly_connected(self.graph.states, self.graph.transitions):
            raise VassError("component graph not strongly connected")

    @property
    def trivial(self) -> bool:
        return len(self.graph.states) == 1 and not self.graph.transitions

    def is_circular(self) -> bool:
        """Every state has in- and out-degree exactly one (a single cycle)."""
        if not self.graph.transitions:
            return False
        indeg = Counter()
        outdeg = Counter()
        for t in self.graph.transitions:
            outdeg[t.src] += 1
            indeg[t.dst] += 1
        return all(indeg[s] == 1 and outdeg[s] == 1 for s in self.graph.states)

    def is_linear_piece(self) -> bool:
        """Trivial, or circular with entry equal to exit; the component
        shapes a linear constraint graph sequence is allowed to contain."""
        if self.trivial:
            return True
        return self.is_circular() and self.entry == self.exit


@dataclass(frozen=True)
class Connector:
    """Transition joining the exit of one component to the next entry."""

    disp: Vec
    origin: int


@dataclass(frozen=True)
class SideConstraint:
    """Strict lower bound ``value > bound`` on one boundary entry."""

    comp: int
    role: str  # "entry" or "exit"
    index: int
    bound: int


@dataclass(frozen=True)
class Cgs:
    """Sequence of constraint graphs joined by connecting transitions."""

    components: Tuple[Cg, ...]
    connectors: Tuple[Connector, ...] = ()
    side_constraints: Tuple[SideConstraint, ...] = ()
    boundary: Optional[Tuple[Vec, Vec]] = None

    def __post_init__(self):
        if len(self.connectors) != max(0, len(self.components) - 1):
            raise VassError("connector count must be component count minus one")
        dims = {c.graph.dim for c in self.components}
        if len(dims) > 1:
            raise VassError("mixed dimensions in components")
        for c in self.connectors:
            # negative origin marks a silent junction: the two components
            # sit at the same location, so no displacement is allowed
            if c.origin < 0 and any(c.disp):
                raise VassError("silent connector must carry zero displacement")
        dim = self.components[0].graph.dim
        for s in self.side_constraints:
            if not 0 <= s.comp < len(self.components):
                raise VassError(f"side constraint names component {s.comp}")
            if s.role not in ("entry", "exit"):
                raise VassError(f"side constraint role {s.role!r}")
            if not 0 <= s.index < dim:
                raise VassError(f"side constraint index {s.index}")

    @property
    def dim(self) -> int:
        return self.components[0].graph.dim

    def size(self) -> int:
        return sum(
            len(c.graph.states) + len(c.graph.transitions) for c in self.components
        ) + len(self.connectors)

    def canonical_key(self) -> Tuple:
        comps = tuple(
            (
                tuple(sorted(map(repr, c.graph.states))),
                tuple(
                    sorted(
                        (repr(t.src), repr(t.dst), t.disp, t.origin)
                        for t in c.graph.transitions
                    )
                ),
                repr(c.entry),
                repr(c.exit),
            )
            for c in self.components
        )
        return (
            comps,
            tuple((c.disp, c.origin) for c in self.connectors),
            tuple(sorted((s.comp, s.role, s.index, s.bound) for s in self.side_constraints)),
            self.boundary,
        )


def single_component_cgs(graph: Vass, entry: State, exit: State) -> Cgs:
    return Cgs(components=(Cg(graph, entry, exit),))


def admits(cgs: Cgs, path: Path) -> bool:
    """Whether a path of the base system (a sequence of origin ids) can be
    factored through the sequence: a run through component 0 from its entry
    to its exit, the first connector, component 1, and so on.

    Nondeterminism (several derived transitions sharing an origin) is
    resolved by subset simulation.  Silent connectors (negative origin)
    consume no input; their crossings are folded in as a closure step.
    """
    k = len(cgs.components)

    def closure(posns: Set[Tuple[int, State]]) -> Set[Tuple[int, State]]:
        frontier = list(posns)
        while frontier:
            j, s = frontier.pop()
            if j < k - 1 and s == cgs.components[j].exit and cgs.connectors[j].origin < 0:
                hop = (j + 1, cgs.components[j + 1].entry)
                if hop not in posns:
                    posns.add(hop)
                    frontier.append(hop)
        return posns

    positions: Set[Tuple[int, State]] = closure({(0, cgs.components[0].entry)})
    for origin in path:
        nxt: Set[Tuple[int, State]] = set()
        for j, s in positions:
            comp = cgs.components[j]
            for t in comp.graph.transitions:
                if t.src == s and t.origin == origin:
                    nxt.add((j, t.dst))
            if j < k - 1 and s == comp.exit and cgs.connectors[j].origin == origin:
                nxt.add((j + 1, cgs.components[j + 1].entry))
        if not nxt:
            return False
        positions = closure(nxt)
    return (k - 1, cgs.components[k - 1].exit) in positions
