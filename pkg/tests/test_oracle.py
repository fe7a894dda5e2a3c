"""Bounded brute-force ground truth: search, closure certificates."""
from __future__ import annotations

import random

import pytest

from vassreach.core import Configuration, VassError, make_vass, validate_walk
from vassreach.oracle import (
    Inconclusive,
    NotWithinBound,
    OracleBound,
    ProvenUnreachable,
    Reachable,
    bfs_reach,
    certified_unreach,
)

B = OracleBound(norm_cap=10)


def up():
    return make_vass(1, ["p"], [("p", "p", (1,))])


def down():
    return make_vass(1, ["p"], [("p", "p", (-1,))])


def skew():
    return make_vass(2, ["p"], [("p", "p", (1, -1)), ("p", "p", (-1, 1))])


class TestBfsReach:
    def test_start_is_target(self):
        assert bfs_reach(up(), Configuration("p", (3,)), Configuration("p", (3,)), B) == Reachable(())

    def test_five_increments(self):
        out = bfs_reach(up(), Configuration("p", (0,)), Configuration("p", (5,)), B)
        assert out == Reachable((0, 0, 0, 0, 0))
        end = validate_walk(up(), Configuration("p", (0,)), out.walk)
        assert end == Configuration("p", (5,))

    def test_monotone_decrease_misses(self):
        out = bfs_reach(down(), Configuration("p", (0,)), Configuration("p", (1,)), B)
        assert out == NotWithinBound(explored=1, closed=True)

    def test_escape_is_not_closed(self):
        out = bfs_reach(up(), Configuration("p", (0,)), Configuration("p", (20,)), B)
        assert out == NotWithinBound(explored=11, closed=False)

    def test_walk_length_cap_truncates(self):
        out = bfs_reach(up(), Configuration("p", (0,)), Configuration("p", (5,)), OracleBound(10, 100_000, 3))
        assert out == NotWithinBound(explored=4, closed=False)

    def test_config_cap_truncates_closed_system(self):
        out = bfs_reach(skew(), Configuration("p", (3, 0)), Configuration("p", (9, 9)), OracleBound(10, 3, 100))
        assert out == NotWithinBound(explored=3, closed=False)

    def test_breadth_first_prefers_low_tid(self):
        par = make_vass(1, ["p", "q"], [("p", "q", (0,)), ("p", "q", (0,))])
        out = bfs_reach(par, Configuration("p", (0,)), Configuration("q", (0,)), B)
        assert out == Reachable((0,))

    def test_bounded_set_fully_explored(self):
        out = bfs_reach(skew(), Configuration("p", (1, 0)), Configuration("p", (2, 0)), B)
        assert out == NotWithinBound(explored=2, closed=True)

    def test_input_validation(self):
        with pytest.raises(VassError):
            bfs_reach(up(), Configuration("z", (0,)), Configuration("p", (0,)), B)
        with pytest.raises(VassError):
            bfs_reach(up(), Configuration("p", (0, 0)), Configuration("p", (0,)), B)


class TestCertifiedUnreach:
    def test_singleton_closure(self):
        out = certified_unreach(down(), Configuration("p", (0,)), Configuration("p", (1,)), B)
        assert out == ProvenUnreachable(explored=1)

    def test_escaping_frontier_is_inconclusive(self):
        out = certified_unreach(up(), Configuration("p", (0,)), Configuration("p", (99,)), B)
        assert out == Inconclusive(reason="norm cap escape", explored=11)

    def test_two_point_diagonal_closure(self):
        # the whole reachability set is {p(1,0), p(0,1)}
        out = certified_unreach(skew(), Configuration("p", (1, 0)), Configuration("p", (2, 0)), B)
        assert out == ProvenUnreachable(explored=2)

    def test_reachable_target_is_named(self):
        out = certified_unreach(up(), Configuration("p", (0,)), Configuration("p", (3,)), B)
        assert out == Inconclusive(reason="target reachable", explored=11)

    def test_config_budget_is_named(self):
        out = certified_unreach(skew(), Configuration("p", (3, 0)), Configuration("p", (9, 9)), OracleBound(10, 3, 100))
        assert out == Inconclusive(reason="configuration budget", explored=3)


class TestBounds:
    def test_positive_fields_required(self):
        for bad in [dict(norm_cap=0), dict(max_configs=0), dict(max_walk_len=-1)]:
            with pytest.raises(VassError):
                OracleBound(**bad)

    def test_defaults_usable(self):
        assert OracleBound().norm_cap > 0


class TestAgreement:
    def rand_instance(self, rng):
        dim = rng.randrange(1, 3)
        n = rng.randrange(1, 4)
        states = [f"s{i}" for i in range(n)]
        triples = []
        if n > 1:
            for i in range(n):
                triples.append(
                    (states[i], states[(i + 1) % n], tuple(rng.randrange(-2, 3) for _ in range(dim)))
                )
        for _ in range(rng.randrange(1, 3)):
            triples.append(
                (rng.choice(states), rng.choice(states), tuple(rng.randrange(-2, 3) for _ in range(dim)))
            )
        vass = make_vass(dim, states, triples)
        start = Configuration(rng.choice(states), tuple(rng.randrange(0, 3) for _ in range(dim)))
        target = Configuration(rng.choice(states), tuple(rng.randrange(0, 4) for _ in range(dim)))
        return vass, start, target

    def test_entry_points_tell_one_story(self):
        rng = random.Random(70)
        bound = OracleBound(norm_cap=8, max_configs=20_000)
        hits = proofs = 0
        for _ in range(200):
            vass, start, target = self.rand_instance(rng)
            got = bfs_reach(vass, start, target, bound)
            cert = certified_unreach(vass, start, target, bound)
            if isinstance(got, Reachable):
                hits += 1
                assert validate_walk(vass, start, got.walk) == target
                assert cert == Inconclusive("target reachable", cert.explored)
            elif got.closed:
                proofs += 1
                assert isinstance(cert, ProvenUnreachable)
                assert cert.explored == got.explored
        assert hits > 50 and proofs > 30

    def test_unreachability_proofs_resist_random_walks(self):
        rng = random.Random(71)
        proven = 0
        for _ in range(150):
            vass, start, target = self.rand_instance(rng)
            cert = certified_unreach(vass, start, target, OracleBound(norm_cap=8))
            if not isinstance(cert, ProvenUnreachable):
                continue
            proven += 1
            for _ in range(30):
                state, loc = start.state, start.location
                for _ in range(25):
                    outs = vass.out_edges(state)
                    if not outs:
                        break
                    t = rng.choice(outs)
                    nxt = tuple(x + d for x, d in zip(loc, t.disp))
                    if any(x < 0 for x in nxt):
                        continue
                    state, loc = t.dst, nxt
                    assert Configuration(state, loc) != target
        assert proven > 30
