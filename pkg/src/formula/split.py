"""
Prefix series of a path condition.

A path condition cannot be cut into independent pieces, so a series is a
sequence of growing prefixes: section i of k holds the first
round-half-up(i * n / k) conjuncts and the last section is the whole
condition.
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import structlog

from ..core.errors import SplitRangeError
from ..ir.machine import MachineConfig
from ..symbolic.pathcond import PathCondition
from .lower import lower
from .terms import Formula


logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class PrefixSeries:
    sections: Tuple[Formula, ...]
    sizes: Tuple[int, ...]
    conditions: Tuple[PathCondition, ...]

    def __len__(self) -> int:
        return len(self.sections)

    def increments(self) -> List[int]:
        return [b - a for a, b in zip((0,) + self.sizes, self.sizes)]


def prefix_sizes(n: int, k: int) -> List[int]:
    if not 1 <= k <= n:
        raise SplitRangeError(f"section count must be between 1 and {n}, got {k}")
    return [(2 * i * n + k) // (2 * k) for i in range(1, k + 1)]


def _series(pc: PathCondition, sizes: List[int], machine: Optional[MachineConfig]) -> PrefixSeries:
    conditions = tuple(pc.prefix(size) for size in sizes)
    return PrefixSeries(tuple(lower(c, machine) for c in conditions), tuple(sizes), conditions)


def split_prefixes(pc: PathCondition, k: int, machine: Optional[MachineConfig] = None) -> PrefixSeries:
    sizes = prefix_sizes(len(pc), k)
    logger.debug("split path condition", conjuncts=len(pc), sections=k, sizes=sizes)
    return _series(pc, sizes, machine)


def split_steps(pc: PathCondition, step: int, machine: Optional[MachineConfig] = None) -> PrefixSeries:
    """Prefixes of sizes step, 2*step, ... up to the condition length.

    Equal absolute sizes let queries from different programs be compared
    section by section.
    """
    n = len(pc)
    if not 1 <= step <= n:
        raise SplitRangeError(f"step must be between 1 and {n}, got {step}")
    return _series(pc, list(range(step, n + 1, step)), machine)
