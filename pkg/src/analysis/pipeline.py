"""
Pass manager.

Runs an ordered pass list repeatedly until a whole round leaves the program
unchanged or the round budget is spent.
"""

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.config import BranchArm, settings
from ..ir.machine import MachineConfig, default_machine
from ..ir.ssa import SsaProgram
from .constprop import constprop
from .dce import dce
from .dse import dse
from .sccp import sccp_undef


logger = structlog.get_logger(__name__)


PassFn = Callable[[SsaProgram, "PassContext"], SsaProgram]


@dataclass(frozen=True)
class PassContext:
    machine: MachineConfig
    undef_branch: BranchArm


PASSES: Dict[str, PassFn] = {
    "constprop": lambda program, ctx: constprop(program, ctx.machine),
    "sccp-undef": lambda program, ctx: sccp_undef(program, ctx.machine, ctx.undef_branch),
    "dce": lambda program, ctx: dce(program),
    "dse": lambda program, ctx: dse(program),
}


class PassPipeline(BaseModel):
    """Ordered pass identifiers and the round budget."""

    model_config = ConfigDict(frozen=True)

    passes: Tuple[str, ...] = Field(default_factory=lambda: tuple(settings.analysis.passes))
    max_rounds: int = Field(default_factory=lambda: settings.analysis.max_rounds, ge=1)
    undef_branch: BranchArm = Field(default_factory=lambda: settings.analysis.undef_branch)

    @field_validator("passes", mode="before")
    @classmethod
    def validate_passes(cls, v):
        if isinstance(v, str):
            v = [name.strip() for name in v.split(",") if name.strip()]
        unknown = [name for name in v if name not in PASSES]
        if unknown:
            raise ValueError(f"unknown passes: {', '.join(unknown)}; "
                             f"available: {', '.join(PASSES)}")
        return tuple(v)


def default_pipeline() -> PassPipeline:
    return PassPipeline()


@dataclass(frozen=True)
class PipelineRun:
    program: SsaProgram
    rounds: int
    converged: bool


class PassManager:
    """Applies a PassPipeline to SSA programs."""

    def __init__(self, pipeline: Optional[PassPipeline] = None,
                 machine: Optional[MachineConfig] = None):
        self.pipeline = pipeline or default_pipeline()
        self.context = PassContext(machine or default_machine(), self.pipeline.undef_branch)

    def run_round(self, program: SsaProgram) -> SsaProgram:
        for name in self.pipeline.passes:
            before = program.program
            program = PASSES[name](program, self.context)
            if program.program != before:
                logger.debug("pass changed program", pass_name=name,
                             instructions=program.program.instruction_count())
        return program

    def run(self, program: SsaProgram) -> PipelineRun:
        for round_no in range(1, self.pipeline.max_rounds + 1):
            result = self.run_round(program)
            if result.program == program.program:
                logger.info("pipeline converged", rounds=round_no,
                            instructions=result.program.instruction_count())
                return PipelineRun(result, round_no, True)
            program = result
        logger.warning("pipeline did not converge", max_rounds=self.pipeline.max_rounds)
        return PipelineRun(program, self.pipeline.max_rounds, False)


def run_pipeline(program: SsaProgram, pipeline: Optional[PassPipeline] = None,
                 machine: Optional[MachineConfig] = None) -> SsaProgram:
    """Run passes to a joint fixpoint; a non-converged result is logged and still returned."""
    return PassManager(pipeline, machine).run(program).program
