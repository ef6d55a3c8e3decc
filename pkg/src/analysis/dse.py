"""
Dead store elimination.

A store is dead when a later store in the same block writes the same
address operand with no load in between, or when no load can run after it.
Memory contents are not observable at exit, so the second rule is exact.
"""

import structlog

from ..ir.cfg import ControlFlowGraph
from ..ir.model import Load, Store, Undef
from ..ir.ssa import SsaProgram


logger = structlog.get_logger(__name__)


def dse(program: SsaProgram) -> SsaProgram:
    fn = program.main
    cfg = ControlFlowGraph(fn)
    loads = [iid for iid, instr in fn.instructions() if isinstance(instr, Load)]

    dead = set()
    for block in fn.blocks:
        for index, instr in enumerate(block.instructions):
            if not isinstance(instr, Store):
                continue
            iid = (block.label, index)
            if not any(cfg.may_precede(iid, load) for load in loads):
                dead.add(iid)
                continue
            for later in block.instructions[index + 1:]:
                if isinstance(later, Load):
                    break
                if isinstance(later, Store) and later.addr == instr.addr and not isinstance(instr.addr, Undef):
                    dead.add(iid)
                    break

    if not dead:
        return program
    logger.debug("dse removed stores", count=len(dead))
    new_fn = fn.map_instructions(lambda iid, instr: None if iid in dead else instr)
    return program.with_program(program.program.with_main(new_fn))
