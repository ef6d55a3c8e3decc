"""
Symbolic Package

Path conditions of single program paths:
- Concrete or decision-directed path walking and path enumeration
- `.pc` dump format
- Shrinkage of path conditions under CVA and the cleanup pipeline
"""

from .pathcond import (
    MEMORY,
    Arith,
    BranchCond,
    Conjunct,
    DefEquality,
    PathCondition,
    PathSpec,
    PathWalker,
    Read,
    StoreStep,
    enumerate_paths,
    parse_decisions,
    path_condition,
)
from .pcfile import dump_pc, load_pc
from .shrink import ShrinkReport, shrinkage

__all__ = [
    # Path conditions
    "MEMORY",
    "Arith",
    "BranchCond",
    "Conjunct",
    "DefEquality",
    "PathCondition",
    "PathSpec",
    "PathWalker",
    "Read",
    "StoreStep",
    "enumerate_paths",
    "parse_decisions",
    "path_condition",

    # Files
    "dump_pc",
    "load_pc",

    # Shrinkage
    "ShrinkReport",
    "shrinkage",
]
