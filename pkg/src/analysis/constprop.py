"""Constant propagation with UnDef folding."""

from typing import Dict, Optional, Union

import structlog

from ..ir.machine import MachineConfig, apply_binary, apply_relation, default_machine
from ..ir.model import UNDEF, BinOp, Compare, Const, ConstAssign, Undef, Var, substitute
from ..ir.ssa import SsaProgram


logger = structlog.get_logger(__name__)

Literal = Union[Const, Undef]


def fold(instr, machine: MachineConfig) -> Optional[ConstAssign]:
    """Constant-assign equivalent of an instruction whose operands are all literals."""
    if isinstance(instr, (BinOp, Compare)):
        operands = (instr.lhs, instr.rhs)
        if any(isinstance(op, Var) for op in operands):
            return None
        if any(isinstance(op, Undef) for op in operands):
            return ConstAssign(instr.dest, UNDEF)
        lhs, rhs = (machine.wrap(op.value) for op in operands)
        if isinstance(instr, BinOp):
            value = apply_binary(instr.op, lhs, rhs, machine.bit_width)
        else:
            value = int(apply_relation(instr.rel, lhs, rhs, machine.bit_width))
        return ConstAssign(instr.dest, Const(value))
    return None


def constprop(program: SsaProgram, machine: Optional[MachineConfig] = None) -> SsaProgram:
    """Fold literal-defined names into their uses and evaluate literal operations.

    Names listed in `program.symbolic_names` are neither substituted nor folded.
    """
    machine = machine or default_machine()
    symbolic = program.symbolic_names
    fn = program.main
    folded = 0

    while True:
        known: Dict[str, Literal] = {
            instr.dest: instr.value
            for _, instr in fn.instructions()
            if isinstance(instr, ConstAssign) and instr.dest not in symbolic
        }
        mapper = substitute(known)

        def rewrite(iid, instr):
            nonlocal folded
            instr = instr.map_operands(mapper)
            if instr.dest is not None and instr.dest not in symbolic:
                constant = fold(instr, machine)
                if constant is not None:
                    folded += 1
                    return constant
            return instr

        new_fn = fn.map_instructions(rewrite)
        if new_fn == fn:
            break
        fn = new_fn

    if folded:
        logger.debug("constprop folded", instructions=folded)
    return program.with_program(program.program.with_main(fn))
