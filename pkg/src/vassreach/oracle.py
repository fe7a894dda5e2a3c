"""Brute-force reachability within explicit bounds.

Ground truth for everything else: a plain breadth-first search over
configurations whose coordinates stay under a norm cap.  Positive answers
come with a validated walk; negative answers are only certificates when
the explored set is *closed* — no enabled transition leads out of the cap
— in which case the cap was never the limiting factor and the target is
genuinely unreachable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from .core import Configuration, Path, Vass, VassError, validate_walk

__all__ = [
    "OracleBound",
    "Reachable",
    "NotWithinBound",
    "ProvenUnreachable",
    "Inconclusive",
    "bfs_reach",
    "certified_unreach",
]


@dataclass(frozen=True)
class OracleBound:
    """Exploration limits; all positive."""

    norm_cap: int = 64
    max_configs: int = 100_000
    max_walk_len: int = 100_000

    def __post_init__(self) -> None:
        if self.norm_cap <= 0 or self.max_configs <= 0 or self.max_walk_len <= 0:
            raise VassError("oracle bounds must be positive")


@dataclass(frozen=True)
class Reachable:
    walk: Path


@dataclass(frozen=True)
class NotWithinBound:
    """Target not found under the caps.

    ``closed`` means the search exhausted a successor-closed set, so the
    answer is definitive; otherwise some configuration escaped the norm
    cap (or a budget tripped) and nothing is proven.
    """

    explored: int
    closed: bool


@dataclass(frozen=True)
class ProvenUnreachable:
    explored: int


@dataclass(frozen=True)
class Inconclusive:
    reason: str
    explored: int


_Key = Tuple[object, Tuple[int, ...]]


def _check(vass: Vass, cfg: Configuration) -> None:
    if cfg.state not in vass.states:
        raise VassError(f"unknown state {cfg.state!r}")
    if len(cfg.location) != vass.dim:
        raise VassError("configuration dimension mismatch")
    if any(x < 0 for x in cfg.location):
        raise VassError("configuration must be nonnegative")


def _explore(vass: Vass, start: Configuration, bound: OracleBound, target: Optional[_Key]):
    """Forward BFS under the caps.

    Returns (parents, hit, closed, truncated): parent pointers for walk
    reconstruction, the target key when found, whether the explored set is
    successor-closed under the norm cap, and whether a budget stopped the
    search early.
    """
    cap = bound.norm_cap
    by_src: Dict[object, list] = {}
    for t in vass.transitions:
        by_src.setdefault(t.src, []).append(t)

    root: _Key = (start.state, start.location)
    parents: Dict[_Key, Optional[Tuple[_Key, int]]] = {root: None}
    frontier = deque([(root, 0)])
    closed = True
    truncated = False
    if target is not None and root == target:
        return parents, root, closed, truncated
    while frontier:
        (state, loc), depth = frontier.popleft()
        if depth >= bound.max_walk_len:
            truncated = True
            continue
        for t in by_src.get(state, ()):
            nxt = tuple(x + d for x, d in zip(loc, t.disp))
            if any(x < 0 for x in nxt):
                continue
            if any(x > cap for x in nxt):
                closed = False
                continue
            key: _Key = (t.dst, nxt)
            if key in parents:
                continue
            if len(parents) >= bound.max_configs:
                truncated = True
                continue
            parents[key] = ((state, loc), t.tid)
            if target is not None and key == target:
                return parents, key, closed, truncated
            frontier.append((key, depth + 1))
    return parents, None, closed, truncated


def _walk_to(parents: Dict[_Key, Optional[Tuple[_Key, int]]], key: _Key) -> Path:
    tids = []
    cur = parents[key]
    while cur is not None:
        prev, tid = cur
        tids.append(tid)
        cur = parents[prev]
    return tuple(reversed(tids))


def bfs_reach(vass: Vass, start: Configuration, target: Configuration, bound: OracleBound):
    """Exhaustive search for a walk from start to target under the caps.

    A ``NotWithinBound`` answer proves nothing unless ``closed`` is set:
    the caps may simply have been too small.
    """
    _check(vass, start)
    _check(vass, target)
    goal: _Key = (target.state, target.location)
    parents, hit, closed, truncated = _explore(vass, start, bound, goal)
    if hit is not None:
        walk = _walk_to(parents, hit)
        assert validate_walk(vass, start, walk) == target
        return Reachable(walk)
    return NotWithinBound(explored=len(parents), closed=closed and not truncated)


def certified_unreach(vass: Vass, start: Configuration, target: Configuration, bound: OracleBound):
    """Unreachability certificate by forward closure.

    When every enabled transition from the explored set lands back inside
    the cap, the set is the whole reachability set, and missing the target
    is a proof.  The walk-length cap is ignored here: a closure argument
    needs the full set, not the short walks.
    """
    _check(vass, start)
    _check(vass, target)
    deep = OracleBound(bound.norm_cap, bound.max_configs, max(bound.max_walk_len, bound.max_configs))
    parents, _, closed, truncated = _explore(vass, start, deep, None)
    goal: _Key = (target.state, target.location)
    if goal in parents:
        return Inconclusive("target reachable", len(parents))
    if truncated:
        return Inconclusive("configuration budget", len(parents))
    if not closed:
        return Inconclusive("norm cap escape", len(parents))
    return ProvenUnreachable(len(parents))
