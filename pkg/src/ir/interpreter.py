"""
Concrete interpreter.

Runs `main` with wrap-around arithmetic and signed comparisons. UnDef
operands are resolved by the machine's undef policy on every read. The
trace records each executed instruction together with the value it
produced and, for branches, the decision taken.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Tuple

import structlog

from ..core.config import settings
from ..core.errors import (
    FuelExhaustedError,
    InterpretError,
    MissingInputError,
    UnassignedVariableError,
)
from .machine import MachineConfig, apply_binary, apply_relation, default_machine
from .model import (
    BinOp,
    Branch,
    Compare,
    Comparison,
    Condition,
    Const,
    ConstAssign,
    InstrId,
    Instruction,
    Jump,
    Load,
    Operand,
    Phi,
    Print,
    Program,
    Return,
    Store,
    Var,
)


logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class TraceEvent:
    iid: InstrId
    instruction: Instruction
    value: Optional[int] = None
    taken: Optional[bool] = None


@dataclass
class ExecResult:
    return_value: int
    prints: List[int] = field(default_factory=list)
    trace: List[TraceEvent] = field(default_factory=list)

    @property
    def steps(self) -> int:
        return len(self.trace)

    def decisions(self) -> Tuple[bool, ...]:
        return tuple(e.taken for e in self.trace if e.taken is not None)


class Interpreter:
    """Executes one program under a fixed machine configuration."""

    def __init__(self, program: Program, config: Optional[MachineConfig] = None,
                 fuel: Optional[int] = None):
        self.program = program
        self.fn = program.main
        self.config = config or default_machine()
        self.fuel = fuel if fuel is not None else settings.path.fuel

    def run(self, inputs: Optional[Mapping[str, int]] = None) -> ExecResult:
        inputs = dict(inputs or {})
        width = self.config.bit_width
        undef = self.config.undef_policy.resolver(width)

        env: Dict[str, int] = {}
        for param in self.fn.params:
            if param not in inputs:
                raise MissingInputError(f"no value for input parameter {param!r}")
            env[param] = self.config.wrap(inputs[param])

        memory: Dict[int, int] = defaultdict(int)
        result = ExecResult(return_value=0)

        def read(op: Operand) -> int:
            if isinstance(op, Const):
                return self.config.wrap(op.value)
            if isinstance(op, Var):
                try:
                    return env[op.name]
                except KeyError:
                    raise UnassignedVariableError(f"read of unassigned variable {op.name!r}") from None
            return undef()

        def record(event: TraceEvent) -> None:
            if len(result.trace) >= self.fuel:
                raise FuelExhaustedError(
                    f"fuel of {self.fuel} steps exhausted; the program may not terminate"
                )
            result.trace.append(event)

        label, prev = self.fn.entry, None
        while True:
            block = self.fn.block(label)
            phis = block.phis()
            if phis:
                # Phis read their operands simultaneously, on entry to the block.
                incoming = []
                for phi in phis:
                    op = phi.value_from(prev) if prev is not None else None
                    if op is None:
                        raise InterpretError(f"phi {phi.dest} has no value for edge {prev} -> {label}")
                    incoming.append(read(op))
                for index, (phi, value) in enumerate(zip(phis, incoming)):
                    record(TraceEvent((label, index), phi, value))
                    env[phi.dest] = value

            for index in range(len(phis), len(block.instructions)):
                instr = block.instructions[index]
                iid = (label, index)

                if isinstance(instr, ConstAssign):
                    value = read(instr.value)
                    record(TraceEvent(iid, instr, value))
                    env[instr.dest] = value
                elif isinstance(instr, BinOp):
                    value = apply_binary(instr.op, read(instr.lhs), read(instr.rhs), width)
                    record(TraceEvent(iid, instr, value))
                    env[instr.dest] = value
                elif isinstance(instr, Compare):
                    value = int(apply_relation(instr.rel, read(instr.lhs), read(instr.rhs), width))
                    record(TraceEvent(iid, instr, value))
                    env[instr.dest] = value
                elif isinstance(instr, Load):
                    value = memory[read(instr.addr)]
                    record(TraceEvent(iid, instr, value))
                    env[instr.dest] = value
                elif isinstance(instr, Store):
                    addr, value = read(instr.addr), read(instr.value)
                    record(TraceEvent(iid, instr, value))
                    memory[addr] = value
                elif isinstance(instr, Print):
                    value = read(instr.value)
                    record(TraceEvent(iid, instr, value))
                    result.prints.append(value)
                elif isinstance(instr, Branch):
                    taken = self.evaluate_condition(instr.cond, read)
                    record(TraceEvent(iid, instr, int(taken), taken))
                    prev, label = label, (instr.then_label if taken else instr.else_label)
                elif isinstance(instr, Jump):
                    record(TraceEvent(iid, instr))
                    prev, label = label, instr.target
                elif isinstance(instr, Return):
                    value = read(instr.value)
                    record(TraceEvent(iid, instr, value))
                    result.return_value = value
                    logger.debug("interpretation finished", steps=result.steps, value=value)
                    return result
                elif isinstance(instr, Phi):
                    raise InterpretError(f"phi {instr.dest} outside block head")

    def evaluate_condition(self, cond: Condition, read) -> bool:
        if isinstance(cond, Comparison):
            return apply_relation(cond.rel, read(cond.lhs), read(cond.rhs), self.config.bit_width)
        return read(cond) != 0


def interpret(program: Program, config: Optional[MachineConfig] = None,
              inputs: Optional[Mapping[str, int]] = None,
              fuel: Optional[int] = None) -> ExecResult:
    """Run `main` and return its result, print log and trace."""
    return Interpreter(program, config, fuel).run(inputs)
