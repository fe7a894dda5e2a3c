"""Exact integer linear algebra helpers.

Everything here works over plain Python ints (arbitrary precision); no
floating point.  Matrices are lists of row lists.  These routines back the
rank bound of the Diophantine kernel, the cycle-space computation, and the
integer solve used by the witness-system solver.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import List, Optional, Sequence, Tuple


def mat_rank(rows: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix, by fraction-free (Bareiss) elimination."""
    m = [list(r) for r in rows if any(r)]
    if not m:
        return 0
    ncols = len(m[0])
    rank = 0
    prev = 1
    row = 0
    for col in range(ncols):
        piv = None
        for i in range(row, len(m)):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        for i in range(row + 1, len(m)):
            for j in range(col + 1, ncols):
                m[i][j] = (m[row][col] * m[i][j] - m[i][col] * m[row][j]) // prev
            m[i][col] = 0
        prev = m[row][col]
        rank += 1
        row += 1
        if row == len(m):
            break
    return rank


def _clear_denominators(vec: Sequence[Fraction]) -> Tuple[int, ...]:
    from math import lcm

    denom = 1
    for x in vec:
        denom = lcm(denom, x.denominator)
    ints = [int(x * denom) for x in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    if g > 1:
        ints = [x // g for x in ints]
    return tuple(ints)


def nullspace(rows: Sequence[Sequence[int]], ncols: int) -> List[Tuple[int, ...]]:
    """Integer basis of the rational nullspace of an integer matrix.

    Gaussian elimination over Fractions, then denominators cleared per basis
    vector.  Suitable for the small systems this package produces.
    """
    m = [[Fraction(x) for x in r] for r in rows]
    pivots: List[int] = []
    row = 0
    for col in range(ncols):
        piv = None
        for i in range(row, len(m)):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[row], m[piv] = m[piv], m[row]
        inv = m[row][col]
        m[row] = [x / inv for x in m[row]]
        for i in range(len(m)):
            if i != row and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[row])]
        pivots.append(col)
        row += 1
    free = [c for c in range(ncols) if c not in pivots]
    basis: List[Tuple[int, ...]] = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -m[r][fc]
        basis.append(_clear_denominators(vec))
    return basis


def solve_integer(
    rows: Sequence[Sequence[int]], rhs: Sequence[int]
) -> Optional[Tuple[List[int], List[List[int]]]]:
    """Solve A x = b over the integers.

    Returns (particular solution, kernel basis) or None when no integer
    solution exists.  Column reduction with extended gcd steps; the
    accumulated transform keeps everything integral.
    """
    nrows = len(rows)
    ncols = len(rows[0]) if nrows else 0
    if ncols == 0:
        if any(rhs):
            return None
        return [], []
    a = [list(r) for r in rows]
    # Transform U tracks column ops so that original_A @ U == reduced a.
    u = [[1 if i == j else 0 for j in range(ncols)] for i in range(ncols)]

    def col_combine(j: int, k: int, c11: int, c12: int, c21: int, c22: int) -> None:
        for i in range(nrows):
            a[i][j], a[i][k] = (
                c11 * a[i][j] + c21 * a[i][k],
                c12 * a[i][j] + c22 * a[i][k],
            )
        for i in range(ncols):
            u[i][j], u[i][k] = (
                c11 * u[i][j] + c21 * u[i][k],
                c12 * u[i][j] + c22 * u[i][k],
            )

    pivot_col = 0
    pivot_rows: List[int] = []
    for r in range(nrows):
        # Reduce row r across columns >= pivot_col to a single gcd entry.
        nz = [j for j in range(pivot_col, ncols) if a[r][j] != 0]
        if not nz:
            continue
        j0 = nz[0]
        for j in nz[1:]:
            p, q = a[r][j0], a[r][j]
            g = gcd(p, q)
            # Extended gcd: s*p + t*q == g.
            s, t = _ext_gcd(p, q)
            col_combine(j0, j, s, -(q // g), t, p // g)
        if j0 != pivot_col:
            col_combine(pivot_col, j0, 0, 1, 1, 0)
        pivot_rows.append(r)
        pivot_col += 1
        if pivot_col == ncols:
            break

    # Forward-substitute on the echelon columns.
    y = [0] * ncols
    seen = set(pivot_rows)
    col = 0
    for r in pivot_rows:
        acc = rhs[r] - sum(a[r][j] * y[j] for j in range(col))
        if acc % a[r][col] != 0:
            return None
        y[col] = acc // a[r][col]
        col += 1
    for r in range(nrows):
        if r in seen:
            continue
        if sum(a[r][j] * y[j] for j in range(ncols)) != rhs[r]:
            return None
    particular = [sum(u[i][j] * y[j] for j in range(ncols)) for i in range(ncols)]
    kernel = [[u[i][j] for i in range(ncols)] for j in range(pivot_col, ncols)]
    return particular, kernel


def _ext_gcd(p: int, q: int) -> Tuple[int, int]:
    """Coefficients (s, t) with s*p + t*q == gcd(p, q)."""
    old_r, r = p, q
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        quot = old_r // r
        old_r, r = r, old_r - quot * r
        old_s, s = s, old_s - quot * s
        old_t, t = t, old_t - quot * t
    if old_r < 0:
        old_s, old_t = -old_s, -old_t
    return old_s, old_t


def row_echelon_lattice(
    vectors: Sequence[Sequence[int]], ncols: int
) -> Tuple[List[Tuple[int, ...]], List[int]]:
    """Echelon basis of the integer lattice spanned by the given vectors.

    Only unimodular row operations are applied (gcd combinations, swaps,
    sign flips), so the returned rows generate exactly the same lattice.
    Returns (rows, pivots): row i has its first nonzero entry, positive, at
    column pivots[i], and every later row is zero there.  That staircase
    shape is what lets callers recover combination coefficients one at a
    time when enumerating lattice points.
    """
    rows = [list(v) for v in vectors if any(v)]
    pivots: List[int] = []
    start = 0
    for col in range(ncols):
        live = [i for i in range(start, len(rows)) if rows[i][col] != 0]
        if not live:
            continue
        while len(live) > 1:
            live.sort(key=lambda i: abs(rows[i][col]))
            base = live[0]
            keep = [base]
            for i in live[1:]:
                q = rows[i][col] // rows[base][col]
                rows[i] = [x - q * y for x, y in zip(rows[i], rows[base])]
                if rows[i][col] != 0:
                    keep.append(i)
            live = keep
        rows[start], rows[live[0]] = rows[live[0]], rows[start]
        if rows[start][col] < 0:
            rows[start] = [-x for x in rows[start]]
        pivots.append(col)
        start += 1
    del rows[start:]
    return [tuple(r) for r in rows], pivots


def independent_rows(vectors: Sequence[Sequence[int]]) -> List[Tuple[int, ...]]:
    """Subset of the input vectors forming a basis of their span."""
    kept: List[Tuple[int, ...]] = []
    current_rank = 0
    for v in vectors:
        if not any(v):
            continue
        candidate = kept + [tuple(v)]
        r = mat_rank(candidate)
        if r > current_rank:
            kept.append(tuple(v))
            current_rank = r
    return kept
