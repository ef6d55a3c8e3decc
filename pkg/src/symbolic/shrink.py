"""Path-condition shrinkage achieved by CVA followed by the cleanup pipeline."""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, Mapping, Optional

import structlog

from ..analysis.cva import CvaConfig, cva
from ..analysis.pipeline import PassPipeline, run_pipeline
from ..core.config import CvaModeName
from ..ir.machine import MachineConfig
from ..ir.model import Program
from ..ir.ssa import SsaProgram, ensure_ssa, source_name
from .pathcond import PathCondition, PathSpec, path_condition


logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class ShrinkReport:
    seed_vars: FrozenSet[str]
    before: PathCondition
    after: PathCondition
    optimised: SsaProgram

    @property
    def reduction(self) -> float:
        """Percentage of conjuncts removed."""
        if not len(self.before):
            return 0.0
        return 100.0 * (len(self.before) - len(self.after)) / len(self.before)

    def render(self) -> str:
        seeds = ", ".join(sorted(self.seed_vars)) or "-"
        return (f"seeds: {seeds}\n"
                f"conjuncts(before) = {len(self.before)}\n"
                f"conjuncts(after) = {len(self.after)}\n"
                f"reduction = {self.reduction:.1f}%")


def shrinkage(program: Program, seed_vars: Iterable[str],
              inputs: Optional[Mapping[str, int]] = None,
              mode: Optional[CvaModeName] = None,
              pipeline: Optional[PassPipeline] = None,
              machine: Optional[MachineConfig] = None) -> ShrinkReport:
    """Conjunct counts of one concrete path before and after cva + pipeline.

    Parameters whose source variable is a seed stay symbolic; every other
    parameter takes its concrete input value.
    """
    seeds = frozenset(seed_vars)
    ssa = ensure_ssa(program)
    spec = PathSpec.concrete(inputs or {})
    symbolic = [p for p in ssa.main.params if source_name(p) in seeds]

    before = path_condition(ssa, spec, symbolic, machine)
    config = CvaConfig(seed_vars=seeds) if mode is None else CvaConfig(seed_vars=seeds, mode=mode)
    optimised = run_pipeline(cva(ssa, config), pipeline, machine)
    after = path_condition(optimised, spec, symbolic, machine)

    report = ShrinkReport(seeds, before, after, optimised)
    logger.info("shrinkage", seeds=sorted(seeds), before=len(before), after=len(after),
                reduction=round(report.reduction, 1))
    return report
