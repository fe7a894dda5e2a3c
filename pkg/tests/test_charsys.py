"""Characteristic systems: assembly, satisfiability, boundedness reports."""
from __future__ import annotations

import random
from itertools import product

import pytest

from vassreach.charsys import (
    BoundednessReport,
    aggregate_solution,
    build_char_system,
    classify,
    decode,
    homogeneous_basis,
    minimal_char_solutions,
    satisfiable,
)
from vassreach.core import Cg, Cgs, Connector, SideConstraint, make_vass
from vassreach.diophantine import (
    BudgetExceeded,
    hilbert_basis,
    inhomogeneous_bound,
    is_solution,
    pottier_bound,
)


def trivial(name="p", dim=1):
    return Cg(make_vass(dim, [name], []), name, name)


def loops(disps, name="p"):
    """Single state with one self-loop per displacement."""
    dim = len(disps[0])
    v = make_vass(dim, [name], [(name, name, d) for d in disps])
    return Cg(v, name, name)


def chain(comps, conn_disps, boundary=None, side=()):
    dim = comps[0].graph.dim
    conns = tuple(
        Connector(tuple(d), 1000 + i) for i, d in enumerate(conn_disps)
    )
    return Cgs(tuple(comps), conns, tuple(side), boundary)


def enumerate_solutions(sys, cap):
    """Every raw assignment within the simplex that satisfies the system."""
    out = []
    for x in product(range(cap + 1), repeat=sys.num_vars):
        if sum(x) > cap:
            continue
        if any(v < lb for v, lb in zip(x, sys.lower_bounds)):
            continue
        if sys.matrix.apply(x) == sys.rhs:
            out.append(x)
    return out


def minimal_of(raws):
    return sorted(
        x
        for x in raws
        if not any(
            y != x and all(a >= b for a, b in zip(x, y)) for y in raws
        )
    )


class TestBuildAndSatisfiable:
    def test_trivial_component_equal_boundary(self):
        cgs = chain([trivial()], [], boundary=None)
        sys = build_char_system(cgs, (1,), (1,))
        assert satisfiable(sys).status == "sat"

    def test_trivial_component_unequal_boundary(self):
        cgs = chain([trivial()], [])
        sys = build_char_system(cgs, (1,), (2,))
        assert satisfiable(sys).status == "unsat"

    def test_self_loop_reaches_two(self):
        cgs = chain([loops([(1,)])], [])
        sys = build_char_system(cgs, (0,), (2,))
        sols = minimal_char_solutions(sys)
        assert len(sols) == 1
        tid = cgs.components[0].graph.transitions[0].tid
        assert sols[0].psi_of(0, tid) == 2
        assert sols[0].entry[0] == (0,)
        assert sols[0].exit[0] == (2,)
        # independently: the only minimal assignment inside a small simplex
        assert minimal_of(enumerate_solutions(sys, 6)) == [
            tuple(sols[0].raw)
        ]

    def test_two_state_cycle_minimal_counts(self):
        # entering at u and leaving at v forces one more u->v than v->u;
        # positivity then pins the minimum at (2, 1)
        v = make_vass(1, ["u", "w"], [("u", "w", (0,)), ("w", "u", (0,))])
        cgs = chain([Cg(v, "u", "w")], [])
        sys = build_char_system(cgs, (0,), (0,))
        sols = minimal_char_solutions(sys)
        assert len(sols) == 1
        assert sols[0].psi_of(0, 0) == 2
        assert sols[0].psi_of(0, 1) == 1
        assert minimal_of(enumerate_solutions(sys, 8)) == [
            tuple(sols[0].raw)
        ]

    def test_boundary_from_cgs_when_omitted(self):
        pinned = chain([trivial()], [], boundary=((1,), (1,)))
        assert satisfiable(build_char_system(pinned)).status == "sat"
        with pytest.raises(ValueError):
            build_char_system(chain([trivial()], []))

    def test_dimension_mismatch_rejected(self):
        cgs = chain([trivial()], [])
        with pytest.raises(ValueError):
            build_char_system(cgs, (1, 2), (1, 2))

    def test_side_constraint_compiled_as_lower_bound(self):
        cgs = chain(
            [loops([(1,)])],
            [],
            side=[SideConstraint(0, "exit", 0, 2)],
        )
        sys = build_char_system(cgs, (0,), (2,))
        # exit value must exceed 2, but the boundary pins it to 2
        assert satisfiable(sys).status == "unsat"
        sys = build_char_system(cgs, (0,), (3,))
        assert satisfiable(sys).status == "sat"

    def test_connector_displacement_enters_chaining(self):
        cgs = chain([trivial("p"), trivial("q")], [(1,)])
        assert satisfiable(build_char_system(cgs, (0,), (1,))).status == "sat"
        assert satisfiable(build_char_system(cgs, (0,), (0,))).status == "unsat"


class TestAggregate:
    def test_trivial_component_zero(self):
        agg = aggregate_solution(chain([trivial()], []))
        assert not any(agg.raw)

    def test_zero_loop_unbounded(self):
        cgs = chain([loops([(0,)])], [])
        agg = aggregate_solution(cgs)
        tid = cgs.components[0].graph.transitions[0].tid
        assert agg.psi_of(0, tid) > 0

    def test_cycle_free_chain_zero(self):
        cgs = chain([trivial("p"), trivial("q")], [(1,)])
        agg = aggregate_solution(cgs)
        assert not any(agg.raw)

    def test_matches_basis_sum(self):
        cgs = chain([loops([(1,), (-1,)])], [])
        basis = homogeneous_basis(cgs)
        agg = aggregate_solution(cgs)
        total = [0] * len(agg.raw)
        for sol in basis:
            total = [a + b for a, b in zip(total, sol.raw)]
        assert list(agg.raw) == total
        assert aggregate_solution(cgs, basis=basis) == agg


class TestClassify:
    def test_zero_aggregate_everything_bounded(self):
        cgs = chain([trivial("p"), trivial("q")], [(1,)])
        rep = classify(cgs)
        assert not any(rep.unbounded_edges)
        assert not any(rep.entry_unbounded)
        assert not any(rep.exit_unbounded)

    def test_skew_loop_forced_bounded(self):
        # the only way psi*(1,-1) vanishes in both coordinates is psi = 0
        cgs = chain([loops([(1, -1)])], [])
        rep = classify(cgs)
        tid = cgs.components[0].graph.transitions[0].tid
        assert tid in rep.bounded_edges[0]
        assert rep.component_bounded == (True,)

    def test_opposed_loops_unbounded(self):
        cgs = chain([loops([(1,), (-1,)])], [])
        rep = classify(cgs)
        assert len(rep.unbounded_edges[0]) == 2
        assert rep.component_bounded == (False,)
        # boundary pinned to zero keeps the entries themselves bounded
        assert rep.entry_unbounded == (frozenset(),)

    def test_interior_entry_unbounded(self):
        # growth must be produced before and absorbed after the interior
        cgs = chain(
            [loops([(1,)], "p"), loops([(1,), (-1,)], "q"), loops([(-1,)], "r")],
            [(0,), (0,)],
        )
        rep = classify(cgs)
        assert 0 in rep.entry_unbounded[1]
        assert 0 in rep.exit_unbounded[1]
        assert rep.entry_unbounded[0] == frozenset()
        assert rep.exit_unbounded[2] == frozenset()

    def test_flags_consistent_with_aggregate(self):
        rng = random.Random(41)
        for _ in range(60):
            cgs = random_chain(rng)
            rep = classify(cgs)
            for j, comp in enumerate(cgs.components):
                for t in comp.graph.transitions:
                    unb = rep.aggregate.psi_of(j, t.tid) > 0
                    assert (t.tid in rep.unbounded_edges[j]) == unb
                    assert (t.tid in rep.bounded_edges[j]) != unb
                dim = cgs.dim
                for i in range(dim):
                    assert (i in rep.entry_unbounded[j]) == (
                        rep.aggregate.entry[j][i] > 0
                    )
                    ortho = i in rep.orthogonal[j]
                    assert (i in rep.iota_entry[j]) == (
                        rep.aggregate.entry[j][i] == 0 and not ortho
                    )
                    assert (i in rep.iota_exit[j]) == (
                        rep.aggregate.exit[j][i] == 0 and not ortho
                    )


def random_chain(rng: random.Random) -> Cgs:
    dim = rng.randint(1, 2)
    total_loops = 0
    comps = []
    for j in range(rng.randint(1, 2)):
        n_loops = rng.randint(0, min(2, 3 - total_loops))
        total_loops += n_loops
        disps = [
            tuple(rng.randint(-1, 1) for _ in range(dim))
            for _ in range(n_loops)
        ]
        name = f"s{j}"
        if disps:
            comps.append(loops(disps, name))
        else:
            comps.append(trivial(name, dim))
    conns = [
        tuple(rng.randint(-1, 1) for _ in range(dim))
        for _ in range(len(comps) - 1)
    ]
    return chain(comps, conns)


def simulate_traversal(cgs: Cgs, rng: random.Random):
    """Take each loop 1-3 times in chain order; every recorded vector moves
    with the start vector, so walking from zero and shifting by the
    observed minimum keeps all of them nonnegative."""
    dim = cgs.dim
    cur = (0,) * dim
    entries, exits, counts = [], [], []
    for j, comp in enumerate(cgs.components):
        if j > 0:
            cur = tuple(c + d for c, d in zip(cur, cgs.connectors[j - 1].disp))
        entries.append(cur)
        block = {}
        for t in comp.graph.transitions:
            block[t.tid] = rng.randint(1, 3)
            cur = tuple(c + block[t.tid] * d for c, d in zip(cur, t.disp))
        counts.append(block)
        exits.append(cur)
    shift = tuple(
        max(0, -min(v[i] for v in entries + exits)) for i in range(dim)
    )
    bump = lambda v: tuple(c + s for c, s in zip(v, shift))
    return [bump(v) for v in entries], [bump(v) for v in exits], counts


class TestSystemProperties:
    def test_simulated_traversals_satisfy_system(self):
        # the assignment induced by an actual traversal must solve the
        # assembled equations exactly
        rng = random.Random(42)
        for _ in range(80):
            cgs = random_chain(rng)
            if any(not c.graph.transitions for c in cgs.components):
                continue
            entries, exits, counts = simulate_traversal(cgs, rng)
            sys = build_char_system(cgs, entries[0], exits[-1])
            raw = [0] * sys.num_vars
            for j in range(len(cgs.components)):
                for i in range(cgs.dim):
                    raw[sys.x_offsets[j] + i] = entries[j][i]
                    raw[sys.y_offsets[j] + i] = exits[j][i]
                for tid, col in sys.psi_offsets[j].items():
                    raw[col] = counts[j][tid]
            assert sys.matrix.apply(raw) == sys.rhs
            assert all(v >= lb for v, lb in zip(raw, sys.lower_bounds))

    def test_bounded_coordinates_fixed_under_growth(self):
        # growing a solution by homogeneous directions never moves a
        # coordinate the report calls bounded
        rng = random.Random(43)
        grown = 0
        for _ in range(80):
            cgs = random_chain(rng)
            try:
                basis = homogeneous_basis(cgs, budget=400_000)
            except BudgetExceeded:
                continue
            if not basis:
                continue
            rep = classify(cgs, basis=basis)
            dim = cgs.dim
            # a boundary realized by an actual traversal is always sat
            entries, exits, _ = simulate_traversal(cgs, rng)
            sys = build_char_system(cgs, entries[0], exits[-1])
            try:
                sols = minimal_char_solutions(sys, budget=400_000)
            except BudgetExceeded:
                continue
            assert sols
            for m in sols[:3]:
                w = list(m.raw)
                for sol in basis:
                    k = rng.randint(0, 2)
                    w = [x + k * y for x, y in zip(w, sol.raw)]
                assert is_solution(sys.matrix, sys.rhs, w)
                wd = decode(sys, w)
                for j, comp in enumerate(cgs.components):
                    for t in comp.graph.transitions:
                        if t.tid in rep.bounded_edges[j]:
                            assert wd.psi_of(j, t.tid) == m.psi_of(
                                j, t.tid
                            )
                    for i in range(dim):
                        if i not in rep.entry_unbounded[j]:
                            assert wd.entry[j][i] == m.entry[j][i]
                        if i not in rep.exit_unbounded[j]:
                            assert wd.exit[j][i] == m.exit[j][i]
                grown += 1
        assert grown > 30

    def test_minimal_solutions_respect_corollary_bound(self):
        rng = random.Random(44)
        done = 0
        for _ in range(40):
            cgs = random_chain(rng)
            dim = cgs.dim
            a = tuple(rng.randint(0, 2) for _ in range(dim))
            b = tuple(rng.randint(0, 2) for _ in range(dim))
            relaxed = build_char_system(cgs, a, b, positivity=False)
            bound = inhomogeneous_bound(relaxed.matrix, relaxed.rhs)
            try:
                sols = minimal_char_solutions(relaxed, budget=400_000)
            except BudgetExceeded:
                continue
            for sol in sols:
                assert sum(sol.raw) <= bound
            done += 1
        assert done > 25

    def test_homogeneous_basis_respects_pottier_bound(self):
        rng = random.Random(45)
        done = 0
        for _ in range(40):
            cgs = random_chain(rng)
            sys = build_char_system(cgs, homogeneous=True)
            bound = pottier_bound(sys.matrix)
            try:
                basis = homogeneous_basis(cgs, budget=400_000)
            except BudgetExceeded:
                continue
            assert hilbert_basis(sys.matrix) == tuple(
                sorted(sol.raw for sol in basis)
            )
            for sol in basis:
                assert sum(sol.raw) <= bound
            done += 1
        assert done > 25
