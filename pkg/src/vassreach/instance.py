"""Textual instance files and the random instance generator.

The file format is line-oriented so corpora diff cleanly and digests are
stable::

    # comment
    vass 2
    state p
    state q
    trans p q 1 -1
    init p 0 0
    target q 3 0

Exactly one ``vass``, one ``init`` and one ``target`` line; states are
declared before use.
"""

from __future__ import annotations

import hashlib
import random
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from .core import Configuration, State, Vass, VassError, Vec, make_vass
from .geometry import geometric_dimension
from .intlinalg import mat_rank

__all__ = [
    "ParseError",
    "Query",
    "parse_instance",
    "format_instance",
    "instance_digest",
    "generate_instance",
]

_TOKEN = re.compile(r"\S+")


class ParseError(VassError):
    """Positioned diagnostic: 1-based line and column."""

    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"line {line}, col {col}: {message}")
        self.line = line
        self.col = col
        self.message = message


@dataclass(frozen=True)
class Query:
    """A parsed instance: the system plus the reachability question."""

    vass: Vass
    start: Configuration
    target: Configuration


def _tokens(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        toks = [(m.start() + 1, m.group()) for m in _TOKEN.finditer(body)]
        if toks:
            yield lineno, toks


def _int(lineno: int, col: int, tok: str) -> int:
    try:
        return int(tok, 10)
    except ValueError:
        raise ParseError(lineno, col, f"expected integer, got {tok!r}") from None


def _vector(lineno: int, toks, start: int, dim: int, what: str) -> Vec:
    got = len(toks) - start
    if got != dim:
        col = toks[-1][0] if got > dim else toks[start - 1][0]
        raise ParseError(lineno, col, f"{what} needs {dim} entries, got {got}")
    return tuple(_int(lineno, c, t) for c, t in toks[start:])


def parse_instance(text: str) -> Query:
    dim: Optional[int] = None
    states: List[State] = []
    declared: set = set()
    triples: List[Tuple[State, State, Vec]] = []
    init: Optional[Tuple[State, Vec]] = None
    target: Optional[Tuple[State, Vec]] = None
    last_line = 0

    for lineno, toks in _tokens(text):
        last_line = lineno
        col0, head = toks[0]
        if head == "vass":
            if dim is not None:
                raise ParseError(lineno, col0, "duplicate vass directive")
            if len(toks) != 2:
                raise ParseError(lineno, col0, "vass takes exactly one dimension")
            d = _int(lineno, toks[1][0], toks[1][1])
            if d <= 0:
                raise ParseError(lineno, toks[1][0], "dimension must be positive")
            dim = d
            continue
        if dim is None:
            raise ParseError(lineno, col0, "vass directive must come first")
        if head == "state":
            if len(toks) != 2:
                raise ParseError(lineno, col0, "state takes exactly one name")
            name = toks[1][1]
            if name in declared:
                raise ParseError(lineno, toks[1][0], f"duplicate state {name}")
            declared.add(name)
            states.append(name)
        elif head == "trans":
            if len(toks) < 3:
                raise ParseError(lineno, col0, "trans needs source and destination")
            for col, name in (toks[1], toks[2]):
                if name not in declared:
                    raise ParseError(lineno, col, f"unknown state {name}")
            disp = _vector(lineno, toks, 3, dim, "displacement")
            triples.append((toks[1][1], toks[2][1], disp))
        elif head in ("init", "target"):
            if len(toks) < 2:
                raise ParseError(lineno, col0, f"{head} needs a state")
            col, name = toks[1]
            if name not in declared:
                raise ParseError(lineno, col, f"unknown state {name}")
            vec = _vector(lineno, toks, 2, dim, f"{head} location")
            if any(x < 0 for x in vec):
                raise ParseError(lineno, toks[2][0], f"{head} location must be nonnegative")
            if head == "init":
                if init is not None:
                    raise ParseError(lineno, col0, "duplicate init directive")
                init = (name, vec)
            else:
                if target is not None:
                    raise ParseError(lineno, col0, "duplicate target directive")
                target = (name, vec)
        else:
            raise ParseError(lineno, col0, f"unknown directive {head!r}")

    for missing, value in (("vass", dim), ("state", states or None),
                           ("init", init), ("target", target)):
        if value is None:
            raise ParseError(last_line + 1, 1, f"missing {missing} directive")
    vass = make_vass(dim, states, triples)
    return Query(
        vass,
        Configuration(init[0], init[1]),
        Configuration(target[0], target[1]),
    )


def _printable(name: State) -> str:
    s = str(name)
    if not s or _TOKEN.fullmatch(s) is None or "#" in s:
        raise VassError(f"state name {name!r} is not printable")
    return s


def format_instance(query: Query) -> str:
    """Canonical text; parse(format(q)) reproduces q exactly."""
    vass = query.vass
    lines = [f"vass {vass.dim}"]
    for s in vass.states:
        lines.append(f"state {_printable(s)}")
    for t in vass.transitions:
        disp = " ".join(str(x) for x in t.disp)
        lines.append(f"trans {_printable(t.src)} {_printable(t.dst)} {disp}")
    lines.append(
        f"init {_printable(query.start.state)} "
        + " ".join(str(x) for x in query.start.location)
    )
    lines.append(
        f"target {_printable(query.target.state)} "
        + " ".join(str(x) for x in query.target.location)
    )
    return "\n".join(lines) + "\n"


def instance_digest(query: Query) -> str:
    return hashlib.sha256(format_instance(query).encode()).hexdigest()[:16]


def _combo(rng: random.Random, basis: Sequence[Vec], dim: int) -> Vec:
    out = [0] * dim
    for vec in basis:
        c = rng.choice((-1, 0, 0, 1))
        if c:
            for i in range(dim):
                out[i] += c * vec[i]
    return tuple(out)


def generate_instance(
    dim: int,
    geom_dim: int,
    states: int,
    norm: int,
    seed: int,
    boundary: int = 3,
) -> Query:
    """Random instance with planted geometric dimension.

    Every edge displacement is a potential difference plus a combination
    of ``geom_dim`` independent vectors, so every cycle displacement lies
    in their span; one self-loop per vector witnesses the whole span.
    The plant is asserted before returning.
    """
    if not 0 <= geom_dim <= dim:
        raise VassError("geometric dimension must lie in [0, dim]")
    if states < 1 or norm < 1 or boundary < 0:
        raise VassError("states and norm must be positive, boundary nonnegative")
    rng = random.Random(seed)

    basis: List[Vec] = []
    while len(basis) < geom_dim:
        cand = tuple(rng.randint(-norm, norm) for _ in range(dim))
        if any(cand) and mat_rank(basis + [cand]) == len(basis) + 1:
            basis.append(cand)

    names = [f"q{i}" for i in range(states)]
    # potentials keep arbitrary extra edges consistent with the plant
    phi: Dict[str, Vec] = {s: tuple(rng.randint(0, 1) for _ in range(dim)) for s in names}

    triples: List[Tuple[str, str, Vec]] = []
    for vec in basis:
        triples.append((rng.choice(names), ) * 2 + (vec,))
    wanted = rng.randint(states, states + 3)
    attempts = 0
    while len(triples) < len(basis) + wanted and attempts < 50 * wanted:
        attempts += 1
        u, v = rng.choice(names), rng.choice(names)
        disp = tuple(
            b - a + c
            for a, b, c in zip(phi[u], phi[v], _combo(rng, basis, dim))
        )
        if max((abs(x) for x in disp), default=0) <= norm:
            triples.append((u, v, disp))

    vass = make_vass(dim, names, triples)
    assert geometric_dimension(vass) == geom_dim, "dimension plant failed"
    start = Configuration(
        rng.choice(names), tuple(rng.randint(0, boundary) for _ in range(dim))
    )
    target = Configuration(
        rng.choice(names), tuple(rng.randint(0, boundary) for _ in range(dim))
    )
    return Query(vass, start, target)
