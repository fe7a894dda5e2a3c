"""Cycle geometry: the vector space spanned by cycle displacements.

For each strongly connected component, the circulations (rational flows
balanced at every state) are exactly the span of the directed cycles, so
pushing a nullspace basis of the flow-balance matrix through the
displacement map yields the displacement span without enumerating cycles.
All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

from .core import Vass, Vec, strongly_connected_components
from .intlinalg import independent_rows, nullspace


@dataclass(frozen=True)
class CycleSpace:
    """Integer basis of the rational span of cycle displacements."""

    dim: int
    basis: Tuple[Vec, ...]

    @property
    def rank(self) -> int:
        return len(self.basis)


def cycle_space(vass: Vass) -> CycleSpace:
    vectors: List[Vec] = []
    for comp in strongly_connected_components(vass.states, vass.transitions):
        members = set(comp)
        edges = [
            t for t in vass.transitions if t.src in members and t.dst in members
        ]
        if not edges:
            continue
        balance = [
            [
                (1 if t.dst == s else 0) - (1 if t.src == s else 0)
                for t in edges
            ]
            for s in comp
        ]
        for circ in nullspace(balance, len(edges)):
            disp = [0] * vass.dim
            for coeff, t in zip(circ, edges):
                for i in range(vass.dim):
                    disp[i] += coeff * t.disp[i]
            vectors.append(tuple(disp))
    return CycleSpace(vass.dim, tuple(independent_rows(vectors)))


def geometric_dimension(vass: Vass) -> int:
    """Dimension of the cycle displacement span."""
    return cycle_space(vass).rank


def orthogonal_indices(vass: Vass) -> Tuple[int, ...]:
    """Axes orthogonal to every cycle displacement.

    Entry i qualifies exactly when every spanning vector vanishes there;
    along such an axis the location change over any path between two fixed
    states is path-independent.
    """
    space = cycle_space(vass)
    return tuple(
        i
        for i in range(vass.dim)
        if all(b[i] == 0 for b in space.basis)
    )
