"""Desk-scale invariant suites behind the ``selftest`` command.

Each suite re-checks one pillar against an independent brute-force
computation on freshly generated random inputs: small enough to finish in
seconds, large enough to catch a broken invariant.  The test suite runs
the same pillars at full acceptance scale.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

from .charsys import build_char_system, minimal_char_solutions
from .core import (
    Cg,
    Cgs,
    Configuration,
    Connector,
    Transition,
    Vass,
    VassError,
    make_vass,
    parikh,
    realize_parikh,
    validate_walk,
)
from .diophantine import (
    BudgetExceeded,
    IntMatrix,
    bruteforce_min_solutions,
    hilbert_basis,
    pottier_bound,
)
from .geometry import cycle_space, orthogonal_indices
from .instance import generate_instance
from .intlinalg import mat_rank
from .oracle import (
    NotWithinBound,
    OracleBound,
    ProvenUnreachable,
    Reachable as OracleReachable,
    bfs_reach,
    certified_unreach,
)
from .search import Reachable, SearchBudget, Unreachable, decide
from .witness import (
    Budget as PumpBudget,
    NotPumpable,
    Pumpable,
    build_witness_system,
    check_pumpable,
    solve_witness_system,
)

__all__ = ["Suite", "run_all", "SUITES"]


@dataclass(frozen=True)
class Suite:
    name: str
    ok: bool
    detail: str


# --- small shared builders -------------------------------------------------

def _random_scc_graph(rng: random.Random, max_states: int, dim: int, norm: int):
    """Strongly connected multigraph: a ring plus random chords."""
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    triples = []
    for i in range(n):
        disp = tuple(rng.randint(-norm, norm) for _ in range(dim))
        triples.append((states[i], states[(i + 1) % n], disp))
    for _ in range(rng.randint(0, n + 1)):
        disp = tuple(rng.randint(-norm, norm) for _ in range(dim))
        triples.append((rng.choice(states), rng.choice(states), disp))
    return make_vass(dim, states, triples)


def _simple_cycles(vass: Vass):
    """Every simple cycle (no repeated state except the anchor), as a tid list."""
    by_src: Dict[object, List[Transition]] = {}
    for t in vass.transitions:
        by_src.setdefault(t.src, []).append(t)
    cycles = []
    order = {s: i for i, s in enumerate(vass.states)}

    def walk(anchor, cur, path, seen):
        for t in by_src.get(cur, ()):
            if t.dst == anchor:
                cycles.append(path + [t.tid])
            # keep each cycle rooted at its smallest state so none repeats
            elif t.dst not in seen and order[t.dst] > order[anchor]:
                seen.add(t.dst)
                walk(anchor, t.dst, path + [t.tid], seen)
                seen.remove(t.dst)

    for s in vass.states:
        walk(s, s, [], {s})
    return cycles


def _span_equal(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> bool:
    ra, rb = mat_rank(a), mat_rank(b)
    return ra == rb == mat_rank(list(a) + list(b))


# --- suites ------------------------------------------------------------------

def hilbert_suite(trials: int = 60, seed: int = 1) -> Suite:
    rng = random.Random(seed)
    done = 0
    for _ in range(trials):
        rows = rng.randint(1, 3)
        cols = rng.randint(1, 4)
        m = IntMatrix.from_rows(
            [[rng.randint(-3, 3) for _ in range(cols)] for _ in range(rows)]
        )
        basis = sorted(hilbert_basis(m, budget=2_000_000))
        bound = (1 + cols * m.max_norm()) ** rows
        for n in basis:
            if sum(n) > bound:
                return Suite("hilbert-kernel", False, f"norm bound broken by {n}")
        brute = bruteforce_min_solutions(m, 0, pottier_bound(m))
        if tuple(basis) != brute:
            return Suite("hilbert-kernel", False, f"mismatch on {m.entries}")
        done += 1
    return Suite("hilbert-kernel", True, f"{done}/{trials} brute-checked")


def euler_suite(trials: int = 80, seed: int = 2) -> Suite:
    rng = random.Random(seed)
    bad_ok = 0
    for _ in range(trials):
        vass = _random_scc_graph(rng, 5, 1, 1)
        by_src: Dict[object, List[Transition]] = {}
        for t in vass.transitions:
            by_src.setdefault(t.src, []).append(t)
        cur = rng.choice(vass.states)
        entry = cur
        path = []
        for _ in range(rng.randint(0, 12)):
            t = rng.choice(by_src[cur])
            path.append(t.tid)
            cur = t.dst
        psi = parikh(path)
        out = realize_parikh(vass, entry, cur, psi)
        if parikh(out) != dict(psi):
            return Suite("euler-roundtrip", False, "parikh image changed")
        # a single off-loop bump breaks flow balance for the same endpoints
        bump = [t.tid for t in vass.transitions if t.src != t.dst]
        if bump:
            broken = dict(psi)
            tid = rng.choice(bump)
            broken[tid] = broken.get(tid, 0) + 1
            try:
                realize_parikh(vass, entry, cur, broken)
                return Suite("euler-roundtrip", False, "imbalanced image realized")
            except VassError:
                bad_ok += 1
    return Suite("euler-roundtrip", True, f"{trials} round-trips, {bad_ok} rejections")


def _random_lcgs(rng: random.Random, dim: int = 2):
    """Alternating trivial / one-cycle components joined by connectors.

    Connector origins are fresh ids so witnesses replay as ordinary
    transitions in the flattened graph.
    """
    comps = []
    k = rng.randint(1, 3)
    for j in range(k):
        name = f"c{j}"
        if rng.random() < 0.4:
            comps.append(Cg(make_vass(dim, [name], []), name, name))
        else:
            length = rng.randint(1, 3)
            states = [f"{name}_{i}" for i in range(length)]
            triples = []
            for i in range(length):
                disp = tuple(rng.randint(-2, 2) for _ in range(dim))
                triples.append((states[i], states[(i + 1) % length], disp))
            comps.append(Cg(make_vass(dim, states, triples), states[0], states[0]))
    conns = tuple(
        Connector(tuple(rng.randint(-1, 1) for _ in range(dim)), 10_000 + j)
        for j in range(k - 1)
    )
    return Cgs(tuple(comps), conns, (), None)


def witness_suite(trials: int = 30, seed: int = 3, max_laps: int = 12) -> Suite:
    rng = random.Random(seed)
    checked = 0
    for _ in range(trials):
        cgs = _random_lcgs(rng)
        dim = cgs.dim
        a = tuple(rng.randint(0, 4) for _ in range(dim))
        b = tuple(rng.randint(0, 4) for _ in range(dim))
        sys = build_witness_system(cgs, a, b)
        out = solve_witness_system(sys)
        if out.status == "budget":
            continue
        brute = _enumerate_lcgs(cgs, a, b, max_laps)
        if out.status == "unsat":
            if brute:
                return Suite("lap-system", False, "unsat but enumeration found counts")
        else:
            end = validate_walk(
                _flatten(cgs), Configuration(("w", 0, cgs.components[0].entry), a), out.path
            )
            last = len(cgs.components) - 1
            if end != Configuration(("w", last, cgs.components[last].exit), b):
                return Suite("lap-system", False, "witness missed the boundary")
            # the enumeration can only refute counts inside its window
            if max(out.counts, default=0) <= max_laps and not brute:
                return Suite("lap-system", False, "sat inside window, brute disagrees")
        checked += 1
    return Suite("lap-system", True, f"{checked}/{trials} against enumeration")


def _flatten(cgs: Cgs) -> Vass:
    """Disjoint union of the components plus connector edges, for replay."""
    states = []
    triples: List[Tuple[object, object, Tuple[int, ...]]] = []
    tids: List[int] = []
    for j, comp in enumerate(cgs.components):
        for s in comp.graph.states:
            states.append(("w", j, s))
        for t in comp.graph.transitions:
            triples.append((("w", j, t.src), ("w", j, t.dst), t.disp))
            tids.append(t.tid)
    for j, c in enumerate(cgs.connectors):
        triples.append(
            (("w", j, cgs.components[j].exit), ("w", j + 1, cgs.components[j + 1].entry), c.disp)
        )
        tids.append(c.origin)
    dim = cgs.dim
    base = make_vass(dim, states, triples)
    trans = tuple(
        Transition(tid, t.src, t.dst, t.disp, t.origin)
        for tid, t in zip(tids, base.transitions)
    )
    return Vass(dim, base.states, trans)


def _enumerate_lcgs(cgs: Cgs, a, b, max_laps: int) -> bool:
    """Ground truth for the lap system: try every lap count ≥ 1."""
    words: List[List[Tuple[Tuple[int, ...], ...]]] = []
    for comp in cgs.components:
        if comp.trivial:
            words.append([()])
            continue
        by_src = {t.src: t for t in comp.graph.transitions}
        disps = []
        cur = comp.entry
        while True:
            t = by_src[cur]
            disps.append(t.disp)
            cur = t.dst
            if cur == comp.entry:
                break
        words.append([tuple(disps) * n for n in range(1, max_laps + 1)])
    conns = [c.disp for c in cgs.connectors]

    def feasible(choice) -> bool:
        vec = list(a)
        for j, laps in enumerate(choice):
            for d in laps:
                for i in range(len(vec)):
                    vec[i] += d[i]
                if any(x < 0 for x in vec):
                    return False
            if j < len(conns):
                for i in range(len(vec)):
                    vec[i] += conns[j][i]
                if any(x < 0 for x in vec):
                    return False
        return tuple(vec) == tuple(b)

    return any(feasible(c) for c in itertools.product(*words))


def _brute_pumpable(cg: Cg, direction: str, indices, base, step_cap: int = 4000) -> bool:
    """Coverability-style search for a pump cycle; dominance-pruned BFS."""
    idx = tuple(sorted(indices))
    if direction == "forward":
        edges = [(t.src, t.dst, t.disp) for t in cg.graph.transitions]
        home = cg.entry
    else:
        edges = [
            (t.dst, t.src, tuple(-x for x in t.disp)) for t in cg.graph.transitions
        ]
        home = cg.exit
    by_src: Dict[object, List[Tuple[object, Tuple[int, ...]]]] = {}
    for src, dst, disp in edges:
        by_src.setdefault(src, []).append((dst, tuple(disp[i] for i in idx)))
    start = tuple(base[i] for i in idx)
    best: Dict[object, List[Tuple[int, ...]]] = {home: [start]}
    frontier = [(home, start)]
    steps = 0
    while frontier and steps < step_cap:
        steps += 1
        nxt = []
        for state, vals in frontier:
            for dst, d in by_src.get(state, ()):
                cand = tuple(v + x for v, x in zip(vals, d))
                if any(x < 0 for x in cand):
                    continue
                if dst == home and all(c > s for c, s in zip(cand, start)):
                    return True
                kept = best.setdefault(dst, [])
                if any(all(a >= b for a, b in zip(old, cand)) for old in kept):
                    continue
                kept[:] = [old for old in kept if not all(a >= b for a, b in zip(cand, old))]
                kept.append(cand)
                nxt.append((dst, cand))
        frontier = nxt
    return False


def pump_suite(trials: int = 50, seed: int = 4) -> Suite:
    rng = random.Random(seed)
    agreed = 0
    for _ in range(trials):
        dim = rng.randint(1, 2)
        vass = _random_scc_graph(rng, 3, dim, 2)
        cg = Cg(vass, vass.states[0], vass.states[-1])
        indices = tuple(sorted(rng.sample(range(dim), rng.randint(1, dim))))
        base = tuple(rng.randint(0, 2) for _ in range(dim))
        direction = rng.choice(("forward", "backward"))
        out = check_pumpable(cg, direction, indices, base)
        if isinstance(out, PumpBudget):
            continue
        brute = _brute_pumpable(cg, direction, indices, base)
        if isinstance(out, Pumpable) != brute:
            return Suite(
                "pumpability", False, f"{direction} disagrees on {vass.transitions}"
            )
        agreed += 1
    return Suite("pumpability", True, f"{agreed}/{trials} against search")


def geometry_suite(trials: int = 40, seed: int = 5) -> Suite:
    rng = random.Random(seed)
    for _ in range(trials):
        dim = rng.randint(1, 3)
        n = rng.randint(1, 6)
        states = [f"g{i}" for i in range(n)]
        triples = []
        for _ in range(rng.randint(1, n + 3)):
            disp = tuple(rng.randint(-2, 2) for _ in range(dim))
            triples.append((rng.choice(states), rng.choice(states), disp))
        vass = make_vass(dim, states, triples)
        by_tid = {t.tid: t for t in vass.transitions}
        disps = []
        for cyc in _simple_cycles(vass):
            total = [0] * dim
            for tid in cyc:
                for i in range(dim):
                    total[i] += by_tid[tid].disp[i]
            disps.append(tuple(total))
        space = cycle_space(vass)
        if not _span_equal(space.basis, disps):
            return Suite("geometry", False, f"span mismatch on {vass.transitions}")
        expect = tuple(
            i for i in range(dim) if all(d[i] == 0 for d in disps)
        )
        if orthogonal_indices(vass) != expect:
            return Suite("geometry", False, f"orthogonal mismatch on {vass.transitions}")
    return Suite("geometry", True, f"{trials} against cycle enumeration")


def oracle_suite(trials: int = 36, seed: int = 6) -> Suite:
    rng = random.Random(seed)
    budget = SearchBudget.tiny()
    ob = OracleBound(24, 40_000, 40_000)
    decided_both = 0
    for trial in range(trials):
        dim = rng.randint(1, 3)
        g = rng.randint(0, min(dim, 2))
        query = generate_instance(dim, g, rng.randint(1, 3), 2, seed * 1000 + trial)
        vass, start, target = query.vass, query.start, query.target
        verdict = decide(vass, start.state, start.location, target.state, target.location, budget)
        fwd = bfs_reach(vass, start, target, ob)
        if isinstance(verdict, Reachable):
            end = validate_walk(vass, start, verdict.walk)
            if end != target:
                return Suite("oracle-agreement", False, "walk misses target")
            cert = certified_unreach(vass, start, target, ob)
            if isinstance(cert, ProvenUnreachable):
                return Suite("oracle-agreement", False, "reachable vs certified closure")
            if isinstance(fwd, OracleReachable):
                decided_both += 1
        elif isinstance(verdict, Unreachable):
            if isinstance(fwd, OracleReachable):
                return Suite("oracle-agreement", False, "unreachable vs oracle walk")
            if isinstance(fwd, NotWithinBound) and fwd.closed:
                decided_both += 1
    return Suite("oracle-agreement", True, f"{decided_both}/{trials} decided by both")


def charsys_suite(trials: int = 30, seed: int = 7) -> Suite:
    """Relaxed-system soundness: oracle-reachable implies satisfiable."""
    rng = random.Random(seed)
    checked = 0
    for trial in range(trials):
        dim = rng.randint(1, 2)
        vass = _random_scc_graph(rng, 3, dim, 1)
        cg = Cg(vass, vass.states[0], vass.states[-1])
        cgs = Cgs((cg,), (), (), None)
        a = tuple(rng.randint(0, 2) for _ in range(dim))
        b = tuple(rng.randint(0, 2) for _ in range(dim))
        res = bfs_reach(
            _flatten(cgs),
            Configuration(("w", 0, cg.entry), a),
            Configuration(("w", 0, cg.exit), b),
            OracleBound(16, 20_000, 20_000),
        )
        if not isinstance(res, OracleReachable):
            continue
        try:
            sols = minimal_char_solutions(
                build_char_system(cgs, a, b, positivity=False), budget=500_000
            )
        except BudgetExceeded:
            continue
        if not sols:
            return Suite("char-system", False, f"reachable but relaxed unsat {trial}")
        checked += 1
    return Suite("char-system", True, f"{checked}/{trials} implied satisfiable")


SUITES = (
    hilbert_suite,
    euler_suite,
    witness_suite,
    pump_suite,
    geometry_suite,
    charsys_suite,
    oracle_suite,
)


def run_all() -> List[Suite]:
    return [suite() for suite in SUITES]
