"""
Mini intermediate representation.

Programs are immutable trees of frozen dataclasses: a Program holds
Functions, a Function holds Blocks, a Block holds Instructions. Every
rewriting pass builds a new tree; structural equality is dataclass equality.
"""

from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Callable, Dict, Iterator, Optional, Tuple, Union


InstrId = Tuple[str, int]
"""Position of an instruction: (block label, index within the block)."""


# Operands

@dataclass(frozen=True)
class Var:
    """Reference to a named value."""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Const:
    """Integer literal, stored as written; wrapped by the machine on use."""
    value: int

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class Undef:
    """The non-deterministic value token."""

    def __str__(self) -> str:
        return "undef"


UNDEF = Undef()

Operand = Union[Var, Const, Undef]


class BinaryOp(str, Enum):
    """Wrap-around arithmetic operators."""
    ADD = "+"
    SUB = "-"
    MUL = "*"


class Relation(str, Enum):
    """Signed comparison relations."""
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="
    EQ = "=="
    NE = "!="

    def negate(self) -> "Relation":
        return _NEGATED[self]


_NEGATED = {
    Relation.LT: Relation.GE,
    Relation.GE: Relation.LT,
    Relation.LE: Relation.GT,
    Relation.GT: Relation.LE,
    Relation.EQ: Relation.NE,
    Relation.NE: Relation.EQ,
}


@dataclass(frozen=True)
class Comparison:
    """Inline branch condition `lhs rel rhs`."""
    rel: Relation
    lhs: Operand
    rhs: Operand

    def __str__(self) -> str:
        return f"{self.lhs} {self.rel.value} {self.rhs}"


Condition = Union[Var, Const, Undef, Comparison]


# Instructions

class Instruction:
    """Common behaviour of all instruction variants.

    Variants without a result declare `dest = None` as a plain class attribute.
    """

    is_terminator = False
    has_side_effect = False

    def operands(self) -> Tuple[Operand, ...]:
        return ()

    def map_operands(self, fn: Callable[[Operand], Operand]) -> "Instruction":
        """Return a copy with every operand replaced by fn(operand)."""
        return self

    def uses(self) -> Tuple[str, ...]:
        return tuple(op.name for op in self.operands() if isinstance(op, Var))

    def successors(self) -> Tuple[str, ...]:
        return ()


@dataclass(frozen=True)
class ConstAssign(Instruction):
    dest: str
    value: Union[Const, Undef]

    def __str__(self) -> str:
        return f"{self.dest} = {self.value}"


@dataclass(frozen=True)
class BinOp(Instruction):
    dest: str
    op: BinaryOp
    lhs: Operand
    rhs: Operand

    def operands(self) -> Tuple[Operand, ...]:
        return (self.lhs, self.rhs)

    def map_operands(self, fn):
        return replace(self, lhs=fn(self.lhs), rhs=fn(self.rhs))

    def __str__(self) -> str:
        return f"{self.dest} = {self.lhs} {self.op.value} {self.rhs}"


@dataclass(frozen=True)
class Compare(Instruction):
    dest: str
    rel: Relation
    lhs: Operand
    rhs: Operand

    def operands(self) -> Tuple[Operand, ...]:
        return (self.lhs, self.rhs)

    def map_operands(self, fn):
        return replace(self, lhs=fn(self.lhs), rhs=fn(self.rhs))

    def __str__(self) -> str:
        return f"{self.dest} = {self.lhs} {self.rel.value} {self.rhs}"


@dataclass(frozen=True)
class Load(Instruction):
    dest: str
    addr: Operand

    def operands(self) -> Tuple[Operand, ...]:
        return (self.addr,)

    def map_operands(self, fn):
        return replace(self, addr=fn(self.addr))

    def __str__(self) -> str:
        return f"{self.dest} = load {self.addr}"


@dataclass(frozen=True)
class Store(Instruction):
    addr: Operand
    value: Operand
    dest = None
    has_side_effect = True

    def operands(self) -> Tuple[Operand, ...]:
        return (self.addr, self.value)

    def map_operands(self, fn):
        return replace(self, addr=fn(self.addr), value=fn(self.value))

    def __str__(self) -> str:
        return f"store {self.addr}, {self.value}"


@dataclass(frozen=True)
class Phi(Instruction):
    dest: str
    incoming: Tuple[Tuple[str, Operand], ...]

    def operands(self) -> Tuple[Operand, ...]:
        return tuple(op for _, op in self.incoming)

    def map_operands(self, fn):
        return replace(self, incoming=tuple((label, fn(op)) for label, op in self.incoming))

    def value_from(self, pred: str) -> Optional[Operand]:
        for label, op in self.incoming:
            if label == pred:
                return op
        return None

    def __str__(self) -> str:
        arms = ", ".join(f"[{label}: {op}]" for label, op in self.incoming)
        return f"{self.dest} = phi {arms}"


@dataclass(frozen=True)
class Print(Instruction):
    value: Operand
    dest = None
    has_side_effect = True

    def operands(self) -> Tuple[Operand, ...]:
        return (self.value,)

    def map_operands(self, fn):
        return replace(self, value=fn(self.value))

    def __str__(self) -> str:
        return f"print {self.value}"


@dataclass(frozen=True)
class Branch(Instruction):
    cond: Condition
    then_label: str
    else_label: str
    dest = None
    is_terminator = True
    has_side_effect = True

    def operands(self) -> Tuple[Operand, ...]:
        if isinstance(self.cond, Comparison):
            return (self.cond.lhs, self.cond.rhs)
        return (self.cond,)

    def map_operands(self, fn):
        if isinstance(self.cond, Comparison):
            cond = replace(self.cond, lhs=fn(self.cond.lhs), rhs=fn(self.cond.rhs))
        else:
            cond = fn(self.cond)
        return replace(self, cond=cond)

    def successors(self) -> Tuple[str, ...]:
        if self.then_label == self.else_label:
            return (self.then_label,)
        return (self.then_label, self.else_label)

    def __str__(self) -> str:
        return f"br {self.cond}, {self.then_label}, {self.else_label}"


@dataclass(frozen=True)
class Jump(Instruction):
    target: str
    dest = None
    is_terminator = True
    has_side_effect = True

    def successors(self) -> Tuple[str, ...]:
        return (self.target,)

    def __str__(self) -> str:
        return f"jmp {self.target}"


@dataclass(frozen=True)
class Return(Instruction):
    value: Operand
    dest = None
    is_terminator = True
    has_side_effect = True

    def operands(self) -> Tuple[Operand, ...]:
        return (self.value,)

    def map_operands(self, fn):
        return replace(self, value=fn(self.value))

    def __str__(self) -> str:
        return f"ret {self.value}"


# Containers

@dataclass(frozen=True)
class Block:
    label: str
    instructions: Tuple[Instruction, ...]

    @property
    def terminator(self) -> Optional[Instruction]:
        if self.instructions and self.instructions[-1].is_terminator:
            return self.instructions[-1]
        return None

    def phis(self) -> Tuple[Phi, ...]:
        head = []
        for instr in self.instructions:
            if not isinstance(instr, Phi):
                break
            head.append(instr)
        return tuple(head)


@dataclass(frozen=True)
class Function:
    name: str
    params: Tuple[str, ...]
    blocks: Tuple[Block, ...]

    @property
    def entry(self) -> str:
        return self.blocks[0].label

    @cached_property
    def block_map(self) -> Dict[str, Block]:
        return {block.label: block for block in self.blocks}

    def block(self, label: str) -> Block:
        return self.block_map[label]

    def instruction(self, iid: InstrId) -> Instruction:
        label, index = iid
        return self.block_map[label].instructions[index]

    def instructions(self) -> Iterator[Tuple[InstrId, Instruction]]:
        for block in self.blocks:
            for index, instr in enumerate(block.instructions):
                yield (block.label, index), instr

    def definitions(self) -> Dict[str, InstrId]:
        """Map each defined name to its (first) defining instruction."""
        defs: Dict[str, InstrId] = {}
        for iid, instr in self.instructions():
            if instr.dest is not None and instr.dest not in defs:
                defs[instr.dest] = iid
        return defs

    def variables(self) -> Tuple[str, ...]:
        """Every name the function mentions, params first, in order of appearance."""
        seen: Dict[str, None] = dict.fromkeys(self.params)
        for _, instr in self.instructions():
            if instr.dest is not None:
                seen.setdefault(instr.dest)
            for name in instr.uses():
                seen.setdefault(name)
        return tuple(seen)

    def with_blocks(self, blocks) -> "Function":
        return Function(self.name, self.params, tuple(blocks))

    def map_instructions(self, fn: Callable[[InstrId, Instruction], Optional[Instruction]]) -> "Function":
        """Rebuild every block through fn; a None result drops the instruction."""
        blocks = []
        for block in self.blocks:
            rebuilt = []
            for index, instr in enumerate(block.instructions):
                new = fn((block.label, index), instr)
                if new is not None:
                    rebuilt.append(new)
            blocks.append(Block(block.label, tuple(rebuilt)))
        return self.with_blocks(blocks)


@dataclass(frozen=True)
class Program:
    functions: Tuple[Function, ...] = field(default_factory=tuple)

    @property
    def main(self) -> Function:
        for fn in self.functions:
            if fn.name == "main":
                return fn
        raise KeyError("main")

    def with_main(self, fn: Function) -> "Program":
        return Program(tuple(fn if f.name == "main" else f for f in self.functions))

    def instruction_count(self) -> int:
        return sum(len(block.instructions) for fn in self.functions for block in fn.blocks)


def substitute(mapping: Dict[str, Operand]) -> Callable[[Operand], Operand]:
    """Operand mapper replacing the named variables."""

    def _apply(op: Operand) -> Operand:
        if isinstance(op, Var) and op.name in mapping:
            return mapping[op.name]
        return op

    return _apply
