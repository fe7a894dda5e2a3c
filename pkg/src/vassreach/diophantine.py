"""Nonnegative integer linear systems: Hilbert bases and minimal solutions.

The solver is a breadth-first Contejean-Devie completion: starting from the
unit vectors, a node t grows by e_i only when the defect A.t still has a
negative inner product with column i, nodes dominating an already-found
solution are pruned, and zero-defect nodes are harvested as basis elements.
Searching level by level means solutions appear in order of 1-norm, so the
harvest is exactly the set of minimal solutions.

Inhomogeneous systems A x = r reduce to the homogeneous case with one
extension variable (solutions of A x - x' r = 0 with x' = 1).  Strict
positivity and other per-variable lower bounds are handled by substituting
x = x' + lb before solving.

Everything is exact integer arithmetic.  Budgets cap the number of
expanded nodes; exhaustion raises BudgetExceeded so callers can report an
unknown outcome instead of a wrong one.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import List, Optional, Sequence, Tuple

from .intlinalg import mat_rank, row_echelon_lattice, solve_integer

Vector = Tuple[int, ...]

DEFAULT_NODE_BUDGET = 2_000_000


class BudgetExceeded(Exception):
    """A bounded computation ran out of its node or size budget."""


@dataclass(frozen=True)
class IntMatrix:
    """Dense integer matrix; rows of equal length."""

    entries: Tuple[Vector, ...]

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @staticmethod
    def from_rows(rows: Sequence[Sequence[int]]) -> "IntMatrix":
        return IntMatrix(tuple(tuple(int(x) for x in r) for r in rows))

    def max_norm(self) -> int:
        return max((abs(x) for r in self.entries for x in r), default=0)

    def column(self, j: int) -> Vector:
        return tuple(r[j] for r in self.entries)

    def apply(self, x: Sequence[int]) -> Vector:
        return tuple(sum(c * v for c, v in zip(row, x)) for row in self.entries)


@dataclass(frozen=True)
class LinearSystem:
    """A x = rhs over nonnegative integers, with per-variable lower bounds."""

    matrix: IntMatrix
    rhs: Vector
    lower_bounds: Vector

    def __post_init__(self):
        if len(self.rhs) != self.matrix.rows:
            raise ValueError("rhs length must match row count")
        if len(self.lower_bounds) != self.matrix.cols:
            raise ValueError("one lower bound per variable")
        if any(b < 0 for b in self.lower_bounds):
            raise ValueError("lower bounds must be nonnegative")


def _as_matrix(a) -> IntMatrix:
    if isinstance(a, IntMatrix):
        return a
    return IntMatrix.from_rows(a)


def pottier_bound(a) -> int:
    """1-norm bound on every minimal homogeneous solution:
    (1 + k * max|A|) ** rank(A)."""
    m = _as_matrix(a)
    r = mat_rank(m.entries) if m.entries else 0
    return (1 + m.cols * m.max_norm()) ** r


def inhomogeneous_bound(a, rhs: Sequence[int]) -> int:
    """1-norm bound on minimal solutions of A x = r, via the extended
    homogeneous system: (1 + k * max|A| + max|r|) ** (rank + 1)."""
    m = _as_matrix(a)
    r = mat_rank(m.entries) if m.entries else 0
    rmax = max((abs(x) for x in rhs), default=0)
    return (1 + m.cols * m.max_norm() + rmax) ** (r + 1)


def _dominates(x: Vector, y: Vector) -> bool:
    """x >= y entrywise."""
    return all(a >= b for a, b in zip(x, y))


def hilbert_basis(a, budget: Optional[int] = None) -> Tuple[Vector, ...]:
    """All minimal nonzero solutions of A x = 0 over the naturals.

    Returns vectors sorted lexicographically.  Every element is checked
    against the Pottier 1-norm bound before being returned.
    """
    m = _as_matrix(a)
    k = m.cols
    if k == 0:
        return ()
    max_nodes = budget if budget is not None else DEFAULT_NODE_BUDGET
    columns = [m.column(j) for j in range(k)]
    norm_bound = pottier_bound(m)
    # Gram matrix lets the frame test <defect, column_i> < 0 run in O(1)
    # per column: a child's dot vector is the parent's plus one gram row.
    gram = [
        tuple(sum(x * y for x, y in zip(columns[i], columns[j])) for j in range(k))
        for i in range(k)
    ]

    basis: List[Vector] = []
    frontier: List[Tuple[Vector, Vector, Vector]] = []
    seen = set()
    for i in range(k):
        unit = tuple(1 if j == i else 0 for j in range(k))
        frontier.append((unit, columns[i], gram[i]))
        seen.add(unit)
    expanded = 0
    while frontier:
        nxt: List[Tuple[Vector, Vector, Vector]] = []
        for vec, defect, dots in frontier:
            expanded += 1
            if expanded > max_nodes:
                raise BudgetExceeded(f"hilbert basis budget of {max_nodes} nodes")
            if not any(defect):
                if not any(_dominates(vec, b) for b in basis):
                    basis.append(vec)
                continue
            total = sum(vec)
            for i in range(k):
                if dots[i] >= 0:
                    continue
                child = vec[:i] + (vec[i] + 1,) + vec[i + 1 :]
                if child in seen:
                    continue
                if total + 1 > norm_bound:
                    continue
                if any(_dominates(child, b) for b in basis):
                    continue
                seen.add(child)
                nxt.append(
                    (
                        child,
                        tuple(d + c for d, c in zip(defect, columns[i])),
                        tuple(d + g for d, g in zip(dots, gram[i])),
                    )
                )
        frontier = nxt

    for b in basis:
        assert sum(b) <= norm_bound, "basis element violates the norm bound"
    return tuple(sorted(basis))


def minimal_solutions(
    a,
    rhs: Sequence[int],
    lower_bounds: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
) -> Tuple[Vector, ...]:
    """Minimal solutions of A x = rhs with x >= lower_bounds, entrywise.

    Reduces to a Hilbert basis computation over one extra variable; the
    solutions are the basis elements whose extension coordinate is 1.
    """
    m = _as_matrix(a)
    k = m.cols
    lbs = tuple(lower_bounds) if lower_bounds is not None else (0,) * k
    if len(lbs) != k:
        raise ValueError("one lower bound per variable")
    shifted_rhs = tuple(
        r - sum(row[j] * lbs[j] for j in range(k))
        for r, row in zip(rhs, m.entries)
    )
    ext_rows = [row + (-sr,) for row, sr in zip(m.entries, shifted_rhs)]
    if not ext_rows:
        # No equations: the unique minimal solution is the lower bound.
        return (lbs,)
    basis = hilbert_basis(IntMatrix.from_rows(ext_rows), budget=budget)
    out = [
        tuple(v + lb for v, lb in zip(vec[:k], lbs))
        for vec in basis
        if vec[k] == 1
    ]
    return tuple(sorted(out))


def solve_system(sys: LinearSystem, budget: Optional[int] = None) -> Tuple[Vector, ...]:
    return minimal_solutions(sys.matrix, sys.rhs, sys.lower_bounds, budget=budget)


def _solutions_graded(m: IntMatrix, target: Vector, cap: int) -> List[Vector]:
    """Every solution of m x = target with 1-norm at most cap, by plain
    recursive enumeration of all of N^k inside the simplex."""
    k = m.cols
    out: List[Vector] = []

    def rec(prefix: List[int], left: int) -> None:
        if len(prefix) == k:
            if m.apply(prefix) == target:
                out.append(tuple(prefix))
            return
        for v in range(left + 1):
            prefix.append(v)
            rec(prefix, left - v)
            prefix.pop()

    rec([], cap)
    return out


def _solutions_lattice(m: IntMatrix, target: Vector, cap: int) -> List[Vector]:
    """Every solution of m x = target with 1-norm at most cap, by walking
    the solution lattice instead of all of N^k.

    Any integer solution is x0 plus an integer combination of the kernel
    lattice basis (the column transform behind solve_integer is unimodular,
    so the basis spans every integer kernel point, not just a finite-index
    sublattice).  With the basis in echelon form, coordinate pivots[i] of
    the final vector depends only on the first i+1 coefficients and must
    land in [0, cap]; that pins each coefficient to an interval once the
    earlier ones are fixed, so the walk is exhaustive within the cap.
    """
    res = solve_integer([list(r) for r in m.entries], list(target))
    if res is None:
        return []
    x0, kernel = res
    vecs, pivots = row_echelon_lattice(kernel, m.cols)
    out: List[Vector] = []

    def rec(i: int, xcur: List[int], spent: int) -> None:
        if i == len(vecs):
            if (
                min(xcur, default=0) >= 0
                and sum(xcur) <= cap
                and m.apply(xcur) == target
            ):
                out.append(tuple(xcur))
            return
        b, p = vecs[i], pivots[i]
        d = b[p]
        lo = -(xcur[p] // d)
        hi = (cap - spent - xcur[p]) // d
        for c in range(lo, hi + 1):
            nxt = [x + c * y for x, y in zip(xcur, b)]
            rec(i + 1, nxt, spent + nxt[p])

    rec(0, list(x0), 0)
    return out


def bruteforce_min_solutions(a, rhs, cap: int) -> Tuple[Vector, ...]:
    """Reference enumerator: nonzero minimal solutions of A x = rhs among
    all candidates of 1-norm at most cap.

    If y <= x entrywise then the 1-norm of y is at most that of x, so a
    dominating solution inside the ball is dominated by a solution inside
    the ball; minimality within the ball is therefore genuine minimality
    there, and with cap at least the relevant norm bound the result is the
    complete minimal set.  rhs may be the integer 0 for the homogeneous
    system; the zero vector is never reported.

    Small simplexes are enumerated directly; larger caps switch to an
    equivalent exhaustive walk of the solution lattice.
    """
    m = _as_matrix(a)
    k = m.cols
    if cap <= 0 or k == 0:
        return ()
    if isinstance(rhs, int):
        if rhs != 0:
            raise ValueError("integer rhs shorthand is only valid for 0")
        target: Vector = (0,) * m.rows
    else:
        target = tuple(rhs)
    if comb(cap + k, k) <= 200_000:
        sols = _solutions_graded(m, target, cap)
    else:
        sols = _solutions_lattice(m, target, cap)
    mins: List[Vector] = []
    for x in sorted((s for s in sols if any(s)), key=sum):
        if not any(_dominates(x, y) for y in mins):
            mins.append(x)
    return tuple(sorted(mins))


def is_solution(a, rhs: Sequence[int], x: Sequence[int]) -> bool:
    return _as_matrix(a).apply(x) == tuple(rhs)
