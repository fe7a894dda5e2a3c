"""Reachability workbench for vector addition systems with states."""

__version__ = "0.1.0"

from .core import (  # noqa: F401
    Cg,
    Cgs,
    Configuration,
    Connector,
    Transition,
    Vass,
    VassError,
    WalkError,
    admits,
    make_vass,
    validate_walk,
)
from .geometry import geometric_dimension, orthogonal_indices  # noqa: F401
from .instance import (  # noqa: F401
    ParseError,
    Query,
    format_instance,
    generate_instance,
    parse_instance,
)
from .oracle import OracleBound, bfs_reach, certified_unreach  # noqa: F401
from .search import (  # noqa: F401
    Reachable,
    SearchBudget,
    TreeStats,
    Unknown,
    Unreachable,
    decide,
    decide_cgs,
)
