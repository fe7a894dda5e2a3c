"""Exact integer linear algebra: rank, nullspace, integer solve, lattices."""
from __future__ import annotations

import random
from fractions import Fraction

from vassreach.intlinalg import (
    independent_rows,
    mat_rank,
    nullspace,
    row_echelon_lattice,
    solve_integer,
)


def rand_matrix(rng: random.Random, rows: int, cols: int, norm: int = 3):
    return [[rng.randint(-norm, norm) for _ in range(cols)] for _ in range(rows)]


def rational_rank(rows):
    m = [[Fraction(x) for x in r] for r in rows]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    row = 0
    for col in range(ncols):
        piv = next((i for i in range(row, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        for i in range(len(m)):
            if i != row and m[i][col]:
                f = m[i][col] / m[row][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        rank += 1
        row += 1
    return rank


class TestRank:
    def test_zero_matrix(self):
        assert mat_rank([[0, 0], [0, 0]]) == 0

    def test_identity(self):
        assert mat_rank([[1, 0], [0, 1]]) == 2

    def test_dependent_rows(self):
        assert mat_rank([[1, 2], [2, 4], [3, 6]]) == 1

    def test_matches_fraction_elimination(self):
        rng = random.Random(5)
        for _ in range(200):
            m = rand_matrix(rng, rng.randint(1, 4), rng.randint(1, 4))
            assert mat_rank(m) == rational_rank(m)


class TestNullspace:
    def test_vectors_annihilate(self):
        rng = random.Random(6)
        for _ in range(200):
            cols = rng.randint(1, 4)
            m = rand_matrix(rng, rng.randint(1, 3), cols)
            for v in nullspace(m, cols):
                assert all(
                    sum(a * b for a, b in zip(row, v)) == 0 for row in m
                )

    def test_dimension_is_cols_minus_rank(self):
        rng = random.Random(7)
        for _ in range(200):
            cols = rng.randint(1, 4)
            m = rand_matrix(rng, rng.randint(1, 3), cols)
            assert len(nullspace(m, cols)) == cols - mat_rank(m)


class TestSolveInteger:
    def test_unsolvable_parity(self):
        # 2x = 1 has no integer solution
        assert solve_integer([[2]], [1]) is None

    def test_particular_plus_kernel(self):
        rng = random.Random(8)
        for _ in range(300):
            rows, cols = rng.randint(1, 3), rng.randint(1, 4)
            m = rand_matrix(rng, rows, cols)
            rhs = [rng.randint(-4, 4) for _ in range(rows)]
            res = solve_integer(m, rhs)
            if res is None:
                continue
            x0, kernel = res
            assert [
                sum(a * b for a, b in zip(row, x0)) for row in m
            ] == rhs
            for v in kernel:
                assert all(
                    sum(a * b for a, b in zip(row, v)) == 0 for row in m
                )

    def test_solution_found_when_one_exists(self):
        # plant a solution, then ask for its image back
        rng = random.Random(9)
        for _ in range(300):
            rows, cols = rng.randint(1, 3), rng.randint(1, 4)
            m = rand_matrix(rng, rows, cols)
            x = [rng.randint(-3, 3) for _ in range(cols)]
            rhs = [sum(a * b for a, b in zip(row, x)) for row in m]
            assert solve_integer(m, rhs) is not None

    def test_kernel_spans_every_integer_point(self):
        # every brute-force kernel point must be an integer combination of
        # the returned basis; catches finite-index sublattices
        rng = random.Random(10)
        checked = 0
        for _ in range(200):
            rows, cols = rng.randint(1, 3), rng.randint(1, 3)
            m = rand_matrix(rng, rows, cols, norm=2)
            _, kernel = solve_integer(m, [0] * rows)
            ech, pivots = row_echelon_lattice(kernel, cols)
            for point in _box_kernel_points(m, cols, 2):
                assert _in_lattice(point, ech, pivots)
                checked += 1
        assert checked > 500

    def test_saturation_regression(self):
        # kernel of [2 1 1] contains (0, 1, -1), which per-variable
        # denominator clearing misses
        _, kernel = solve_integer([[2, 1, 1]], [0])
        ech, pivots = row_echelon_lattice(kernel, 3)
        assert _in_lattice((0, 1, -1), ech, pivots)


def _box_kernel_points(m, cols, box):
    from itertools import product

    for x in product(range(-box, box + 1), repeat=cols):
        if any(x) and all(sum(a * b for a, b in zip(row, x)) == 0 for row in m):
            yield x


def _in_lattice(point, rows, pivots):
    """Peel off one echelon row per pivot; membership iff residue is zero."""
    residue = list(point)
    for row, p in zip(rows, pivots):
        if residue[p] % row[p] != 0:
            return False
        c = residue[p] // row[p]
        residue = [r - c * v for r, v in zip(residue, row)]
    return not any(residue)


def _hermite(rows, pivots):
    """Reduce entries above each pivot into [0, pivot): the unique normal
    form of the lattice, so equal lattices compare equal."""
    out = [list(r) for r in rows]
    for i in range(len(out) - 1, -1, -1):
        p = pivots[i]
        for j in range(i):
            c = out[j][p] // out[i][p]
            out[j] = [a - c * b for a, b in zip(out[j], out[i])]
    return [tuple(r) for r in out]


class TestEchelonLattice:
    def test_staircase_shape(self):
        rng = random.Random(11)
        for _ in range(200):
            cols = rng.randint(1, 5)
            vecs = rand_matrix(rng, rng.randint(0, 4), cols)
            rows, pivots = row_echelon_lattice(vecs, cols)
            assert pivots == sorted(pivots)
            for i, (row, p) in enumerate(zip(rows, pivots)):
                assert row[p] > 0
                assert not any(row[:p])
                for later in rows[i + 1 :]:
                    assert later[p] == 0

    def test_lattice_preserved_both_ways(self):
        rng = random.Random(12)
        for _ in range(200):
            cols = rng.randint(1, 4)
            vecs = rand_matrix(rng, rng.randint(1, 4), cols, norm=2)
            rows, pivots = row_echelon_lattice(vecs, cols)
            assert len(rows) == mat_rank(vecs)
            # each original vector is reachable from the echelon rows
            for v in vecs:
                assert _in_lattice(tuple(v), rows, pivots)
            # adjoining the echelon rows must not grow the lattice: full
            # Hermite reduction is canonical per lattice
            again, again_pivots = row_echelon_lattice(
                list(vecs) + list(rows), cols
            )
            assert again_pivots == pivots
            assert _hermite(rows, pivots) == _hermite(again, pivots)

    def test_empty_and_zero_inputs(self):
        assert row_echelon_lattice([], 3) == ([], [])
        assert row_echelon_lattice([[0, 0, 0]], 3) == ([], [])


class TestIndependentRows:
    def test_keeps_a_basis(self):
        rng = random.Random(13)
        for _ in range(200):
            cols = rng.randint(1, 4)
            vecs = rand_matrix(rng, rng.randint(0, 5), cols)
            kept = independent_rows(vecs)
            assert mat_rank(kept) == len(kept) == mat_rank(vecs)

    def test_kept_rows_come_from_input(self):
        vecs = [[1, 0], [0, 0], [2, 0], [0, 3]]
        assert independent_rows(vecs) == [(1, 0), (0, 3)]
