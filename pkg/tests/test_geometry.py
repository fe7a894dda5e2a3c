"""Cycle-displacement geometry: span, dimension, orthogonal axes."""
from __future__ import annotations

import random
from typing import Dict, List

from vassreach.core import Transition, Vass, make_vass
from vassreach.geometry import cycle_space, geometric_dimension, orthogonal_indices
from vassreach.intlinalg import mat_rank


def loops_graph(disps):
    dim = len(disps[0])
    return make_vass(dim, ["p"], [("p", "p", d) for d in disps])


def acyclic(dim):
    return make_vass(dim, ["p", "q"], [("p", "q", (1,) * dim)])


def random_graph(rng: random.Random, max_states=6, dim=3, norm=2) -> Vass:
    n = rng.randint(1, max_states)
    states = [f"s{i}" for i in range(n)]
    triples = []
    for _ in range(rng.randint(0, 2 * n)):
        disp = tuple(rng.randint(-norm, norm) for _ in range(dim))
        triples.append((rng.choice(states), rng.choice(states), disp))
    return make_vass(dim, states, triples)


def simple_cycle_displacements(vass: Vass) -> List[tuple]:
    """Reference oracle: displacement of every simple cycle, by DFS
    anchored at each cycle's smallest state."""
    order = {s: i for i, s in enumerate(vass.states)}
    by_src: Dict[object, List[Transition]] = {}
    for t in vass.transitions:
        by_src.setdefault(t.src, []).append(t)
    found = []

    def extend(anchor, cur, disp, seen):
        for t in by_src.get(cur, ()):
            nxt = tuple(a + b for a, b in zip(disp, t.disp))
            if t.dst == anchor:
                found.append(nxt)
            elif t.dst not in seen and order[t.dst] > order[anchor]:
                extend(anchor, t.dst, nxt, seen | {t.dst})

    for s in vass.states:
        extend(s, s, (0,) * vass.dim, {s})
    return found


def spans_equal(a, b) -> bool:
    ra, rb = mat_rank(a), mat_rank(b)
    return ra == rb == mat_rank(list(a) + list(b))


class TestExamples:
    def test_acyclic_dimension_zero(self):
        space = cycle_space(acyclic(3))
        assert space.rank == 0
        assert space.basis == ()
        assert geometric_dimension(acyclic(3)) == 0

    def test_independent_loops(self):
        v = loops_graph([(1, 0, 0), (0, 1, 0)])
        assert geometric_dimension(v) == 2

    def test_collinear_loops(self):
        v = loops_graph([(1, 1), (2, 2)])
        assert geometric_dimension(v) == 1

    def test_orthogonal_second_axis(self):
        assert orthogonal_indices(loops_graph([(1, 0), (2, 0)])) == (1,)

    def test_orthogonal_none(self):
        assert orthogonal_indices(loops_graph([(1, 0), (0, 1)])) == ()

    def test_orthogonal_vacuous(self):
        assert orthogonal_indices(acyclic(3)) == (0, 1, 2)

    def test_union_across_components(self):
        # one loop per SCC; the span collects both
        v = make_vass(
            2,
            ["p", "q"],
            [("p", "p", (1, 0)), ("q", "q", (0, 1)), ("p", "q", (5, 5))],
        )
        assert geometric_dimension(v) == 2


class TestProperties:
    def test_simple_cycle_oracle(self):
        rng = random.Random(51)
        for _ in range(120):
            v = random_graph(rng)
            cycles = simple_cycle_displacements(v)
            space = cycle_space(v)
            assert spans_equal(cycles, list(space.basis))
            want = tuple(
                i
                for i in range(v.dim)
                if all(c[i] == 0 for c in cycles)
            )
            assert orthogonal_indices(v) == want

    def test_basis_independent_and_bounded(self):
        rng = random.Random(52)
        for _ in range(120):
            v = random_graph(rng)
            space = cycle_space(v)
            assert space.rank == len(space.basis) <= v.dim
            if space.basis:
                assert mat_rank(space.basis) == space.rank

    def test_orthogonal_iff_basis_column_zero(self):
        rng = random.Random(53)
        for _ in range(120):
            v = random_graph(rng)
            space = cycle_space(v)
            orth = set(orthogonal_indices(v))
            for i in range(v.dim):
                col_zero = all(b[i] == 0 for b in space.basis)
                assert (i in orth) == col_zero

    def test_subgraph_dimension_monotone(self):
        rng = random.Random(54)
        for _ in range(120):
            v = random_graph(rng)
            if not v.transitions:
                continue
            keep = [t for t in v.transitions if rng.random() < 0.6]
            sub = Vass(
                dim=v.dim,
                states=v.states,
                transitions=tuple(
                    Transition(t.tid, t.src, t.dst, t.disp) for t in keep
                ),
            )
            assert geometric_dimension(sub) <= geometric_dimension(v)
