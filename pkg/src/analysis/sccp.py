"""
Sparse conditional constant propagation with UnDef branch folding.

Lattice, from top to bottom::

    TOP  >  UNDEF  >  CONST(c)  >  BOTTOM

UNDEF sits above the constants because an undefined value may be chosen to
equal any constant it meets. Arithmetic and comparisons with an UNDEF
operand are UNDEF; a branch on an UNDEF condition takes the configured arm.
"""

from collections import deque
from dataclasses import dataclass
from typing import Dict, Optional, Set, Tuple

import structlog

from ..core.config import BranchArm, settings
from ..ir.machine import MachineConfig, apply_binary, apply_relation, default_machine
from ..ir.model import (
    UNDEF,
    BinOp,
    Block,
    Branch,
    Compare,
    Comparison,
    Const,
    Instruction,
    ConstAssign,
    Jump,
    Operand,
    Phi,
    Undef,
)
from ..ir.ssa import SsaProgram


logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class LatticeValue:
    kind: str
    value: int = 0

    def __str__(self) -> str:
        return str(self.value) if self.kind == "const" else self.kind


TOP = LatticeValue("top")
UNDEF_VALUE = LatticeValue("undef")
BOTTOM = LatticeValue("bottom")


def const(value: int) -> LatticeValue:
    return LatticeValue("const", value)


def meet(a: LatticeValue, b: LatticeValue) -> LatticeValue:
    if a == TOP:
        return b
    if b == TOP:
        return a
    if a == UNDEF_VALUE:
        return b
    if b == UNDEF_VALUE:
        return a
    if a == b:
        return a
    return BOTTOM


Edge = Tuple[str, str]


class SparseConditionalPropagation:
    """Wegman-Zadeck propagation over SSA names and CFG edges."""

    def __init__(self, program: SsaProgram, machine: MachineConfig, undef_branch: BranchArm):
        self.program = program
        self.fn = program.main
        self.machine = machine
        self.undef_branch = undef_branch
        self.values: Dict[str, LatticeValue] = {p: BOTTOM for p in self.fn.params}
        self.executable_blocks: Set[str] = set()
        self.executable_edges: Set[Edge] = set()
        self.users: Dict[str, Set[str]] = {}
        for (label, _), instr in self.fn.instructions():
            for name in instr.uses():
                self.users.setdefault(name, set()).add(label)

    def value_of(self, op: Operand) -> LatticeValue:
        if isinstance(op, Const):
            return const(self.machine.wrap(op.value))
        if isinstance(op, Undef):
            return UNDEF_VALUE
        return self.values.get(op.name, TOP)

    def evaluate_pair(self, lhs: Operand, rhs: Operand, apply) -> LatticeValue:
        a, b = self.value_of(lhs), self.value_of(rhs)
        if TOP in (a, b):
            return TOP
        if UNDEF_VALUE in (a, b):
            return UNDEF_VALUE
        if BOTTOM in (a, b):
            return BOTTOM
        return const(int(apply(a.value, b.value)))

    def evaluate(self, label: str, instr) -> LatticeValue:
        width = self.machine.bit_width
        if instr.dest in self.program.symbolic_names:
            return BOTTOM
        if isinstance(instr, ConstAssign):
            return self.value_of(instr.value)
        if isinstance(instr, BinOp):
            return self.evaluate_pair(instr.lhs, instr.rhs,
                                      lambda a, b: apply_binary(instr.op, a, b, width))
        if isinstance(instr, Compare):
            return self.evaluate_pair(instr.lhs, instr.rhs,
                                      lambda a, b: apply_relation(instr.rel, a, b, width))
        if isinstance(instr, Phi):
            result = TOP
            for pred, op in instr.incoming:
                if (pred, label) in self.executable_edges:
                    result = meet(result, self.value_of(op))
            return result
        return BOTTOM

    def condition(self, cond) -> LatticeValue:
        if isinstance(cond, Comparison):
            width = self.machine.bit_width
            return self.evaluate_pair(cond.lhs, cond.rhs,
                                      lambda a, b: apply_relation(cond.rel, a, b, width))
        value = self.value_of(cond)
        if value.kind == "const":
            return const(int(value.value != 0))
        return value

    def taken_targets(self, branch: Branch) -> Tuple[str, ...]:
        verdict = self.condition(branch.cond)
        if verdict in (TOP, BOTTOM):
            return branch.successors()
        if verdict == UNDEF_VALUE:
            return (branch.then_label if self.undef_branch is BranchArm.THEN else branch.else_label,)
        return (branch.then_label if verdict.value else branch.else_label,)

    def solve(self) -> None:
        blocks = deque([self.fn.entry])
        self.executable_blocks.add(self.fn.entry)
        pending = deque()

        def visit(label: str) -> None:
            for instr in self.fn.block(label).instructions:
                if instr.dest is not None:
                    new = meet(self.values.get(instr.dest, TOP), self.evaluate(label, instr))
                    if new != self.values.get(instr.dest, TOP):
                        self.values[instr.dest] = new
                        pending.extend(self.users.get(instr.dest, ()))
                targets = ()
                if isinstance(instr, Branch):
                    targets = self.taken_targets(instr)
                elif isinstance(instr, Jump):
                    targets = (instr.target,)
                for target in targets:
                    edge = (label, target)
                    if edge not in self.executable_edges:
                        self.executable_edges.add(edge)
                        self.executable_blocks.add(target)
                        blocks.append(target)

        while blocks or pending:
            label = blocks.popleft() if blocks else pending.popleft()
            if label in self.executable_blocks:
                visit(label)

    def rewrite(self) -> Tuple[Block, ...]:
        terminators: Dict[str, Instruction] = {}
        live_edges: Set[Edge] = set()
        for block in self.fn.blocks:
            if block.label not in self.executable_blocks:
                continue
            instr = block.terminator
            if isinstance(instr, Branch):
                targets = self.taken_targets(instr)
                if len(targets) == 1:
                    instr = Jump(targets[0])
            terminators[block.label] = instr
            live_edges.update((block.label, succ) for succ in instr.successors())

        # Edges taken only under an earlier lattice state are gone now.
        reachable = {self.fn.entry}
        work = [self.fn.entry]
        while work:
            label = work.pop()
            for src, dst in live_edges:
                if src == label and dst not in reachable:
                    reachable.add(dst)
                    work.append(dst)

        result = []
        for block in self.fn.blocks:
            if block.label not in reachable:
                continue
            head, lifted, body = [], [], []
            for instr in block.instructions:
                if isinstance(instr, Phi):
                    folded = self.literal_for(instr.dest)
                    if folded is not None:
                        lifted.append(folded)
                    else:
                        head.append(Phi(instr.dest, tuple(
                            (pred, op) for pred, op in instr.incoming
                            if pred in reachable and (pred, block.label) in live_edges
                        )))
                    continue
                if instr.is_terminator:
                    instr = terminators[block.label]
                elif instr.dest is not None and not isinstance(instr, ConstAssign):
                    folded = self.literal_for(instr.dest)
                    if folded is not None:
                        instr = folded
                body.append(instr)
            result.append(Block(block.label, tuple(head + lifted + body)))
        return tuple(result)

    def literal_for(self, name: str) -> Optional[ConstAssign]:
        if name in self.program.symbolic_names:
            return None
        value = self.values.get(name, TOP)
        if value.kind == "const":
            return ConstAssign(name, Const(value.value))
        if value == UNDEF_VALUE:
            return ConstAssign(name, UNDEF)
        return None


def sccp_undef(program: SsaProgram, machine: Optional[MachineConfig] = None,
               undef_branch: Optional[BranchArm] = None) -> SsaProgram:
    """Fold constant and UnDef branches, drop unreachable blocks and dead phi arms."""
    machine = machine or default_machine()
    undef_branch = BranchArm(undef_branch or settings.analysis.undef_branch)
    solver = SparseConditionalPropagation(program, machine, undef_branch)
    solver.solve()
    blocks = solver.rewrite()
    removed = len(program.main.blocks) - len(blocks)
    if removed:
        logger.debug("sccp removed blocks", blocks=removed,
                     executable_edges=len(solver.executable_edges))
    return program.with_program(program.program.with_main(program.main.with_blocks(blocks)))
