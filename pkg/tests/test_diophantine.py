"""Hilbert bases and minimal solutions of nonnegative linear systems."""
from __future__ import annotations

import random
from itertools import product

import pytest

from vassreach.diophantine import (
    BudgetExceeded,
    IntMatrix,
    LinearSystem,
    bruteforce_min_solutions,
    hilbert_basis,
    inhomogeneous_bound,
    is_solution,
    minimal_solutions,
    pottier_bound,
    solve_system,
    _solutions_graded,
    _solutions_lattice,
)


def rand_system(rng: random.Random, max_rows=3, max_cols=4, norm=3):
    rows = rng.randint(1, max_rows)
    cols = rng.randint(1, max_cols)
    return IntMatrix.from_rows(
        [[rng.randint(-norm, norm) for _ in range(cols)] for _ in range(rows)]
    )


class TestIntMatrix:
    def test_from_rows_and_shape(self):
        m = IntMatrix.from_rows([[1, -2, 0], [3, 4, 5]])
        assert (m.rows, m.cols) == (2, 3)
        assert m.column(1) == (-2, 4)
        assert m.max_norm() == 5

    def test_apply(self):
        m = IntMatrix.from_rows([[1, -1], [2, 0]])
        assert m.apply((3, 1)) == (2, 6)

    def test_linear_system_validation(self):
        m = IntMatrix.from_rows([[1, 1]])
        with pytest.raises(ValueError):
            LinearSystem(m, (1, 2), (0, 0))
        with pytest.raises(ValueError):
            LinearSystem(m, (1,), (0,))
        with pytest.raises(ValueError):
            LinearSystem(m, (1,), (0, -1))


class TestHilbertBasis:
    def test_difference_system(self):
        assert hilbert_basis([[1, -1]]) == ((1, 1),)

    def test_weighted_difference(self):
        assert hilbert_basis([[2, -3]]) == ((3, 2),)

    def test_zero_matrix_units(self):
        assert hilbert_basis([[0]]) == ((1,),)

    def test_output_sorted_and_deterministic(self):
        m = rand_system(random.Random(31))
        out = hilbert_basis(m)
        assert out == tuple(sorted(out)) == hilbert_basis(m)

    def test_budget_raises_instead_of_truncating(self):
        with pytest.raises(BudgetExceeded):
            hilbert_basis([[2, -3]], budget=1)

    def test_oracle_equivalence(self):
        rng = random.Random(32)
        for _ in range(200):
            m = rand_system(rng)
            assert hilbert_basis(m) == bruteforce_min_solutions(
                m, 0, pottier_bound(m)
            )

    def test_norm_bound_and_minimality(self):
        rng = random.Random(33)
        for _ in range(150):
            m = rand_system(rng)
            basis = hilbert_basis(m)
            bound = pottier_bound(m)
            for v in basis:
                assert any(v)
                assert is_solution(m, (0,) * m.rows, v)
                assert sum(v) <= bound
            assert_incomparable(basis)


def assert_incomparable(vectors):
    for x in vectors:
        for y in vectors:
            if x != y:
                assert not all(a >= b for a, b in zip(x, y))


class TestMinimalSolutions:
    def test_single_variable(self):
        assert minimal_solutions([[1]], (3,)) == ((3,),)

    def test_sum_two(self):
        assert minimal_solutions([[1, 1]], (2,)) == ((0, 2), (1, 1), (2, 0))

    def test_difference_one(self):
        assert minimal_solutions([[1, -1]], (1,)) == ((1, 0),)

    def test_zero_rhs_has_zero_solution(self):
        # the trivial solution is the unique minimum of the homogeneous
        # system; nontrivial minima are the Hilbert basis instead
        assert minimal_solutions([[1, -1]], (0,)) == (((0, 0)),)

    def test_lower_bounds_shift(self):
        assert minimal_solutions([[1, -1]], (0,), lower_bounds=(1, 1)) == (
            (1, 1),
        )
        assert minimal_solutions([[1, 1]], (3,), lower_bounds=(1, 1)) == (
            (1, 2),
            (2, 1),
        )

    def test_solve_system_wrapper(self):
        sys = LinearSystem(IntMatrix.from_rows([[1, 1]]), (2,), (0, 1))
        assert solve_system(sys) == ((0, 2), (1, 1))

    def test_oracle_equivalence_inhomogeneous(self):
        rng = random.Random(34)
        done = 0
        while done < 120:
            m = rand_system(rng, max_rows=2, max_cols=3, norm=2)
            rhs = tuple(rng.randint(-2, 2) for _ in range(m.rows))
            if not any(rhs):
                continue
            cap = inhomogeneous_bound(m, rhs)
            if cap > 4000:
                continue
            assert minimal_solutions(m, rhs) == bruteforce_min_solutions(
                m, rhs, cap
            )
            done += 1

    def test_norm_bound_and_minimality(self):
        rng = random.Random(35)
        for _ in range(150):
            m = rand_system(rng)
            rhs = tuple(rng.randint(-3, 3) for _ in range(m.rows))
            sols = minimal_solutions(m, rhs)
            bound = inhomogeneous_bound(m, rhs)
            for v in sols:
                assert is_solution(m, rhs, v)
                assert sum(v) <= bound
            assert_incomparable(sols)

    def test_decomposition_property(self):
        # every solution is a minimal one plus basis elements
        rng = random.Random(36)
        checked = 0
        for _ in range(250):
            m = rand_system(rng, max_rows=2, max_cols=3, norm=2)
            rhs = tuple(rng.randint(-2, 2) for _ in range(m.rows))
            mins = minimal_solutions(m, rhs)
            basis = hilbert_basis(m)
            wits = [
                w
                for w in product(range(7), repeat=m.cols)
                if sum(w) <= 6 and is_solution(m, rhs, w)
            ]
            for w in rng.sample(wits, min(4, len(wits))):
                assert any(
                    all(a >= b for a, b in zip(w, v))
                    and decomposes(
                        tuple(a - b for a, b in zip(w, v)), basis
                    )
                    for v in mins
                )
                checked += 1
        assert checked > 150


def decomposes(residual, basis, _seen=None):
    """Is residual a sum of basis vectors (possibly empty)?"""
    if not any(residual):
        return True
    if _seen is None:
        _seen = set()
    if residual in _seen:
        return False
    _seen.add(residual)
    for b in basis:
        if all(r >= v for r, v in zip(residual, b)):
            if decomposes(
                tuple(r - v for r, v in zip(residual, b)), basis, _seen
            ):
                return True
    return False


class TestBruteforceOracle:
    def test_difference_cap_three(self):
        assert bruteforce_min_solutions([[1, -1]], 0, 3) == ((1, 1),)

    def test_weighted_cap_seven(self):
        assert bruteforce_min_solutions([[2, -3]], 0, 7) == ((3, 2),)

    def test_zero_cap_empty(self):
        assert bruteforce_min_solutions([[1, -1]], 0, 0) == ()

    def test_integer_shorthand_only_for_zero(self):
        with pytest.raises(ValueError):
            bruteforce_min_solutions([[1, -1]], 1, 3)

    def test_enumeration_paths_agree(self):
        # the simplex recursion and the lattice walk must see the same
        # solution set whenever both are run on the same ball
        rng = random.Random(37)
        for _ in range(150):
            m = rand_system(rng)
            rhs = tuple(rng.randint(-2, 2) for _ in range(m.rows))
            cap = rng.randint(0, 8)
            graded = sorted(_solutions_graded(m, rhs, cap))
            lattice = sorted(_solutions_lattice(m, rhs, cap))
            assert graded == lattice

    def test_large_cap_uses_lattice_walk(self):
        # rank-3 system: the pottier cap is far beyond direct enumeration
        m = IntMatrix.from_rows([[3, -3, 0, 0], [0, 3, -3, 0], [0, 0, 3, -3]])
        cap = pottier_bound(m)
        assert cap == 13 ** 3
        assert bruteforce_min_solutions(m, 0, cap) == ((1, 1, 1, 1),)
