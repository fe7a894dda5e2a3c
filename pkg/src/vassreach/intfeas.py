"""Exact feasibility for small integer linear systems.

Used by the witness-system solver, where the variable count is tiny (one
per cycle) but verdicts must be exact.  Equalities are solved over the
integer lattice first (particular solution plus kernel); the inequalities
then live in the kernel coordinates, where Fourier-Motzkin elimination
over exact rationals yields per-variable intervals that are enumerated in
lexicographic order.

When every interval met during enumeration is finite the search is
exhaustive, so "no point" is a definitive unsat.  Otherwise intervals are
clamped to a window and exhaustion is only a budget verdict.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, floor
from typing import Callable, List, Optional, Sequence, Tuple

from .intlinalg import solve_integer

Row = Tuple[Tuple[int, ...], int]  # coeffs . x >= rhs


@dataclass
class IntFeasResult:
    status: str  # "sat", "unsat" or "budget"
    point: Optional[Tuple[int, ...]] = None


def _fm_levels(rows: List[Tuple[Tuple[Fraction, ...], Fraction]], nvars: int):
    """Eliminate variables from the back; levels[j] constrains u_0..u_j."""
    levels: List[List[Tuple[Tuple[Fraction, ...], Fraction]]] = [[] for _ in range(nvars)]
    current = rows
    for j in range(nvars - 1, -1, -1):
        keep: List[Tuple[Tuple[Fraction, ...], Fraction]] = []
        pos: List[Tuple[Tuple[Fraction, ...], Fraction]] = []
        neg: List[Tuple[Tuple[Fraction, ...], Fraction]] = []
        for coeffs, rhs in current:
            c = coeffs[j]
            if c > 0:
                pos.append((coeffs, rhs))
            elif c < 0:
                neg.append((coeffs, rhs))
            else:
                keep.append((coeffs, rhs))
        levels[j] = pos + neg
        combined = keep
        for pc, pr in pos:
            for nc, nr in neg:
                # pc.u >= pr gives u_j >= ..., nc.u >= nr gives u_j <= ...
                scale_p = -nc[j]
                scale_n = pc[j]
                coeffs = tuple(
                    scale_p * pa + scale_n * na for pa, na in zip(pc, nc)
                )
                rhs = scale_p * pr + scale_n * nr
                if any(coeffs[:j]):
                    combined.append((coeffs[:j] + (Fraction(0),) * (nvars - j), rhs))
                elif rhs > 0:
                    return None, j  # 0 >= positive: rationally empty
        current = combined
    for coeffs, rhs in current:
        if rhs > 0:
            return None, 0
    return levels, None


def solve_linear(
    eq_rows: Sequence[Sequence[int]],
    eq_rhs: Sequence[int],
    ineq_rows: Sequence[Sequence[int]],
    ineq_rhs: Sequence[int],
    nvars: int,
    window: int = 128,
    candidate_cap: int = 200_000,
    objective: Optional[Sequence[int]] = None,
) -> IntFeasResult:
    """Find x in Z^nvars with eq.x = eq_rhs and ineq.x >= ineq_rhs.

    With an objective, the returned point minimizes objective.x over the
    enumerated region (globally minimal whenever the region is bounded).
    """
    if nvars == 0:
        if any(eq_rhs) or any(r > 0 for r in ineq_rhs):
            return IntFeasResult("unsat")
        return IntFeasResult("sat", ())

    if eq_rows:
        solved = solve_integer(eq_rows, list(eq_rhs))
        if solved is None:
            return IntFeasResult("unsat")
        particular, kernel = solved
    else:
        particular = [0] * nvars
        kernel = [
            [1 if i == j else 0 for i in range(nvars)] for j in range(nvars)
        ]
    f = len(kernel)

    # Inequalities in kernel coordinates: (F K) u >= rhs - F xp.
    u_rows: List[Tuple[Tuple[Fraction, ...], Fraction]] = []
    fixed_violation = False
    for coeffs, rhs in zip(ineq_rows, ineq_rhs):
        base = sum(c * p for c, p in zip(coeffs, particular))
        krow = tuple(
            Fraction(sum(c * kvec[i] for i, c in enumerate(coeffs)))
            for kvec in kernel
        )
        resid = Fraction(rhs - base)
        if not any(krow):
            if resid > 0:
                fixed_violation = True
            continue
        u_rows.append((krow, resid))
    if fixed_violation:
        return IntFeasResult("unsat")
    if f == 0:
        return IntFeasResult("sat", tuple(particular))

    levels, _bad = _fm_levels(list(u_rows), f)
    if levels is None:
        return IntFeasResult("unsat")

    def to_x(u: Sequence[int]) -> Tuple[int, ...]:
        return tuple(
            p + sum(uv * kernel[h][i] for h, uv in enumerate(u))
            for i, p in enumerate(particular)
        )

    best: Optional[Tuple[int, Tuple[int, ...]]] = None
    clamped = False
    budget = [candidate_cap]

    def interval(j: int, partial: List[int]) -> Optional[Tuple[Optional[int], Optional[int]]]:
        lo: Optional[Fraction] = None
        hi: Optional[Fraction] = None
        for coeffs, rhs in levels[j]:
            c = coeffs[j]
            acc = rhs - sum(coeffs[i] * partial[i] for i in range(j))
            bound = acc / c
            if c > 0:
                if lo is None or bound > lo:
                    lo = bound
            else:
                if hi is None or bound < hi:
                    hi = bound
        ilo = None if lo is None else ceil(lo)
        ihi = None if hi is None else floor(hi)
        if ilo is not None and ihi is not None and ilo > ihi:
            return None
        return ilo, ihi

    def descend(j: int, partial: List[int]) -> Optional[Tuple[int, ...]]:
        nonlocal clamped, best
        rng = interval(j, partial)
        if rng is None:
            return None
        ilo, ihi = rng
        if ilo is None:
            ilo = -window
            clamped = True
        elif ilo < -window:
            ilo = -window
            clamped = True
        if ihi is None:
            ihi = window
            clamped = True
        elif ihi > window:
            ihi = window
            clamped = True
        for val in range(ilo, ihi + 1):
            budget[0] -= 1
            if budget[0] < 0:
                clamped = True
                return None
            partial.append(val)
            if j == f - 1:
                x = to_x(partial)
                partial.pop()
                if objective is None:
                    return x
                score = sum(o * xv for o, xv in zip(objective, x))
                if best is None or (score, x) < best:
                    best = (score, x)
                continue
            found = descend(j + 1, partial)
            partial.pop()
            if found is not None:
                return found
        return None

    found = descend(0, [])
    if objective is not None and best is not None:
        return IntFeasResult("sat", best[1])
    if found is not None:
        return IntFeasResult("sat", found)
    return IntFeasResult("budget" if clamped else "unsat")
