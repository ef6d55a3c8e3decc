"""
Dead code elimination.

Three cleanups, repeated until none applies:

- blocks unreachable from the entry are deleted, with their phi arms;
- instructions whose result is transitively unused and that have no side
  effect are deleted (prints, stores and terminators are always kept);
- a block whose only predecessor ends in `jmp` to it is merged into that
  predecessor.
"""

from typing import Dict, List, Set

import structlog

from ..ir.cfg import ControlFlowGraph, remove_unreachable
from ..ir.model import Block, Function, Jump, Operand, Phi, substitute
from ..ir.ssa import SsaProgram


logger = structlog.get_logger(__name__)


def remove_dead_instructions(fn: Function) -> Function:
    """Mark from side-effecting roots through operand definitions, then sweep."""
    defs = fn.definitions()
    live: Set[str] = set()
    work: List[str] = []
    for _, instr in fn.instructions():
        if instr.has_side_effect:
            work.extend(instr.uses())
    while work:
        name = work.pop()
        if name in live:
            continue
        live.add(name)
        site = defs.get(name)
        if site is not None:
            work.extend(fn.instruction(site).uses())

    return fn.map_instructions(
        lambda _, instr: instr if instr.has_side_effect or instr.dest in live else None
    )


def merge_blocks(fn: Function) -> Function:
    """Merge one block into its sole jumping predecessor, if any such pair exists."""
    cfg = ControlFlowGraph(fn)
    for block in fn.blocks:
        term = block.terminator
        if not isinstance(term, Jump):
            continue
        target = term.target
        if target == block.label or target == fn.entry or cfg.preds[target] != [block.label]:
            continue

        succ = fn.block(target)
        # Single-predecessor phis are plain copies of their only operand.
        copies: Dict[str, Operand] = {phi.dest: phi.incoming[0][1] for phi in succ.phis() if phi.incoming}
        if any(name in copies for phi in succ.phis() for name in phi.uses()):
            continue
        merged = Block(block.label, block.instructions[:-1] + succ.instructions[len(succ.phis()):])

        blocks = []
        for other in fn.blocks:
            if other.label == target:
                continue
            current = merged if other.label == block.label else other
            blocks.append(Block(current.label, tuple(
                Phi(instr.dest, tuple((block.label if p == target else p, op) for p, op in instr.incoming))
                if isinstance(instr, Phi) else instr
                for instr in current.instructions
            )))
        merged_fn = fn.with_blocks(blocks)
        if copies:
            mapper = substitute(copies)
            merged_fn = merged_fn.map_instructions(lambda _, instr: instr.map_operands(mapper))
        logger.debug("merged block", into=block.label, block=target)
        return merged_fn
    return fn


def dce(program: SsaProgram) -> SsaProgram:
    """Delete unreachable blocks and dead instructions, then merge straight-line blocks."""
    fn = program.main
    while True:
        new = merge_blocks(remove_dead_instructions(remove_unreachable(fn)))
        if new == fn:
            break
        fn = new
    removed = program.program.instruction_count() - sum(len(b.instructions) for b in fn.blocks)
    if removed:
        logger.debug("dce removed instructions", count=removed)
    return program.with_program(program.program.with_main(fn))
