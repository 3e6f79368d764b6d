"""Partitioned shared space: cells with affinity, accounted access paths, collectives."""

from .collectives import Collectives
from .counters import AccessCounters
from .executor import run_ranks
from .shared_space import (
    Cell,
    Field,
    LocalView,
    Phase,
    PrefetchBuffer,
    SharedSpace,
    distribute,
)

__all__ = [
    "AccessCounters",
    "Cell",
    "Collectives",
    "Field",
    "LocalView",
    "Phase",
    "PrefetchBuffer",
    "SharedSpace",
    "distribute",
    "run_ranks",
]
