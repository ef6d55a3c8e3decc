"""
Single-path symbolic execution.

Walks one path through an SSA program and records, in execution order,
the conjuncts of its feasibility query:

- ``def``    one per executed value-producing instruction (phis included);
- ``branch`` one per executed conditional branch, negated structurally when
             the else arm is taken;
- ``store``  one per executed store to ``mem_arr``.

The k-th execution (k >= 2) of a definition of ``x`` defines the fresh
instance ``x__k``. Every UnDef read becomes a fresh unconstrained name
``undef_<n>``. Jumps, prints and returns contribute nothing.
"""

from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import settings
from ..core.errors import DecisionUnderrunError, FuelExhaustedError, MissingInputError, PathError
from ..ir.machine import MachineConfig, apply_binary, apply_relation, default_machine
from ..ir.model import (
    BinaryOp,
    BinOp,
    Branch,
    Compare,
    Comparison,
    Const,
    ConstAssign,
    Jump,
    Load,
    Operand,
    Phi,
    Print,
    Relation,
    Return,
    Store,
    Undef,
    Var,
)
from ..ir.ssa import SsaProgram


logger = structlog.get_logger(__name__)

MEMORY = "mem_arr"


# Terms

Atom = Union[Var, Const]


@dataclass(frozen=True)
class Arith:
    op: BinaryOp
    lhs: Atom
    rhs: Atom

    def __str__(self) -> str:
        return f"{self.lhs} {self.op.value} {self.rhs}"


@dataclass(frozen=True)
class Read:
    """Memory read at `addr` from the current store chain."""
    addr: Atom

    def __str__(self) -> str:
        return f"{MEMORY}[{self.addr}]"


PcTerm = Union[Var, Const, Arith, Comparison, Read]


@dataclass(frozen=True)
class DefEquality:
    name: str
    term: PcTerm

    def __str__(self) -> str:
        return f"{self.name} = {self.term}"


@dataclass(frozen=True)
class BranchCond:
    """Branch conjunct; `cond` already carries the polarity of the taken arm."""
    cond: Comparison
    taken: bool

    def __str__(self) -> str:
        return str(self.cond)


@dataclass(frozen=True)
class StoreStep:
    array: str
    index: Atom
    value: Atom

    def __str__(self) -> str:
        return f"{self.array}[{self.index}] := {self.value}"


Conjunct = Union[DefEquality, BranchCond, StoreStep]


@dataclass(frozen=True)
class PathCondition:
    conjuncts: Tuple[Conjunct, ...] = ()
    symbolic_inputs: FrozenSet[str] = frozenset()
    target: str = ""
    decisions: Tuple[bool, ...] = ()
    fresh_names: Tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.conjuncts)

    def prefix(self, size: int) -> "PathCondition":
        """The first `size` conjuncts; the target describes the cut."""
        conjuncts = self.conjuncts[:size]
        mentioned = _mentioned(conjuncts)
        return PathCondition(
            conjuncts,
            frozenset(n for n in self.symbolic_inputs if n in mentioned),
            self.target if size >= len(self.conjuncts) else f"prefix of {size} conjuncts",
            self.decisions,
            tuple(n for n in self.fresh_names if n in mentioned),
        )

    def render(self) -> str:
        """The query as a single conjunction."""
        return " ∧ ".join(str(c) for c in self.conjuncts) if self.conjuncts else "true"


def _atom_names(term) -> Iterable[str]:
    if isinstance(term, Var):
        yield term.name
    elif isinstance(term, (Arith, Comparison)):
        yield from _atom_names(term.lhs)
        yield from _atom_names(term.rhs)
    elif isinstance(term, Read):
        yield from _atom_names(term.addr)


def _mentioned(conjuncts: Iterable[Conjunct]) -> Set[str]:
    names: Set[str] = set()
    for c in conjuncts:
        if isinstance(c, DefEquality):
            names.add(c.name)
            names.update(_atom_names(c.term))
        elif isinstance(c, BranchCond):
            names.update(_atom_names(c.cond))
        else:
            names.update(_atom_names(c.index))
            names.update(_atom_names(c.value))
    return names


# Path specification

class PathSpec(BaseModel):
    """Either concrete inputs or an explicit branch-decision list, plus a fuel budget."""

    model_config = ConfigDict(frozen=True)

    inputs: Optional[Dict[str, int]] = None
    decisions: Optional[Tuple[bool, ...]] = None
    fuel: int = Field(default_factory=lambda: settings.path.fuel, ge=1)

    @model_validator(mode="after")
    def _one_mode(self):
        if self.inputs is None and self.decisions is None:
            raise ValueError("a path spec needs concrete inputs or a decision list")
        return self

    @classmethod
    def concrete(cls, inputs: Optional[Mapping[str, int]] = None, fuel: Optional[int] = None) -> "PathSpec":
        data = {"inputs": dict(inputs or {})}
        if fuel is not None:
            data["fuel"] = fuel
        return cls(**data)

    @classmethod
    def directed(cls, decisions: Iterable[bool], fuel: Optional[int] = None) -> "PathSpec":
        data = {"decisions": tuple(decisions)}
        if fuel is not None:
            data["fuel"] = fuel
        return cls(**data)

    @property
    def is_concrete(self) -> bool:
        return self.decisions is None


def parse_decisions(text: str) -> Tuple[bool, ...]:
    """`T,F,T` (also `1,0`, `then,else`) to booleans."""
    truthy, falsy = {"t", "true", "1", "then"}, {"f", "false", "0", "else"}
    result = []
    for token in (t.strip().lower() for t in text.split(",")):
        if not token:
            continue
        if token in truthy:
            result.append(True)
        elif token in falsy:
            result.append(False)
        else:
            raise PathError(f"invalid branch decision {token!r}; use T or F")
    return tuple(result)


# Walker

class PathWalker:
    """Walks one path and collects its conjuncts."""

    def __init__(self, program: SsaProgram, spec: PathSpec,
                 symbolic: Optional[Iterable[str]] = None,
                 machine: Optional[MachineConfig] = None):
        self.fn = program.main
        self.spec = spec
        self.machine = machine or default_machine()
        inputs = spec.inputs or {}
        if symbolic is None:
            symbolic = self.fn.params
        self.symbolic = frozenset(p for p in self.fn.params if p in set(symbolic) or p not in inputs)
        if spec.is_concrete:
            missing = [p for p in self.fn.params if p not in inputs]
            if missing:
                raise MissingInputError(f"no concrete value for input(s) {', '.join(missing)}")
        self.program_names = set(self.fn.variables())

    def run(self) -> PathCondition:
        width = self.machine.bit_width
        undef = self.machine.undef_policy.resolver(width)
        concrete = self.spec.is_concrete
        inputs = self.spec.inputs or {}
        decisions = list(self.spec.decisions or ())
        used_decisions: List[bool] = []

        terms: Dict[str, Atom] = {}
        values: Dict[str, int] = {}
        for param in self.fn.params:
            if param in self.symbolic:
                terms[param] = Var(param)
            else:
                terms[param] = Const(self.machine.wrap(inputs[param]))
            if param in inputs:
                values[param] = self.machine.wrap(inputs[param])

        executions: Dict[str, int] = defaultdict(int)
        fresh: List[str] = []
        memory: Dict[int, int] = defaultdict(int)
        conjuncts: List[Conjunct] = []
        steps = 0

        def instance(name: str) -> str:
            executions[name] += 1
            return name if executions[name] == 1 else f"{name}__{executions[name]}"

        def fresh_undef() -> Var:
            n = len(fresh) + 1
            candidate = f"undef_{n}"
            while candidate in self.program_names or candidate in fresh:
                n += 1
                candidate = f"undef_{n}"
            fresh.append(candidate)
            return Var(candidate)

        def atom(op: Operand) -> Tuple[Atom, Optional[int]]:
            """Term and (concrete mode) value of an operand read."""
            if isinstance(op, Const):
                return Const(self.machine.wrap(op.value)), self.machine.wrap(op.value)
            if isinstance(op, Undef):
                return fresh_undef(), (undef() if concrete else None)
            if op.name not in terms:
                raise PathError(f"read of {op.name!r} before its definition on this path")
            return terms[op.name], values.get(op.name)

        def define(name: str, term: PcTerm, value: Optional[int]) -> None:
            inst = instance(name)
            conjuncts.append(DefEquality(inst, term))
            terms[name] = Var(inst)
            if value is not None:
                values[name] = value
            else:
                values.pop(name, None)

        def tick() -> None:
            nonlocal steps
            steps += 1
            if steps > self.spec.fuel:
                raise FuelExhaustedError(f"fuel of {self.spec.fuel} steps exhausted on path")

        label, prev = self.fn.entry, None
        while True:
            block = self.fn.block(label)
            phis = block.phis()
            if phis:
                reads = []
                for phi in phis:
                    op = phi.value_from(prev) if prev is not None else None
                    if op is None:
                        raise PathError(f"phi {phi.dest} has no operand for edge {prev} -> {label}")
                    reads.append(atom(op))
                for phi, (term, value) in zip(phis, reads):
                    tick()
                    define(phi.dest, term, value)

            for instr in block.instructions[len(phis):]:
                tick()
                if isinstance(instr, ConstAssign):
                    define(instr.dest, *atom(instr.value))
                elif isinstance(instr, (BinOp, Compare)):
                    (lt, lv), (rt, rv) = atom(instr.lhs), atom(instr.rhs)
                    value = None
                    if lv is not None and rv is not None:
                        if isinstance(instr, BinOp):
                            value = apply_binary(instr.op, lv, rv, width)
                        else:
                            value = int(apply_relation(instr.rel, lv, rv, width))
                    term = Arith(instr.op, lt, rt) if isinstance(instr, BinOp) else Comparison(instr.rel, lt, rt)
                    define(instr.dest, term, value)
                elif isinstance(instr, Load):
                    at, av = atom(instr.addr)
                    define(instr.dest, Read(at), memory[av] if av is not None and concrete else None)
                elif isinstance(instr, Store):
                    (at, av), (vt, vv) = atom(instr.addr), atom(instr.value)
                    conjuncts.append(StoreStep(MEMORY, at, vt))
                    if concrete:
                        memory[av] = vv
                elif isinstance(instr, Branch):
                    cond, value = self._condition(instr.cond, atom)
                    if concrete:
                        taken = bool(value)
                    else:
                        if len(used_decisions) >= len(decisions):
                            raise DecisionUnderrunError(
                                f"branch in {label!r} needs decision #{len(used_decisions) + 1}, "
                                f"only {len(decisions)} supplied"
                            )
                        taken = decisions[len(used_decisions)]
                    used_decisions.append(taken)
                    if not taken:
                        cond = Comparison(cond.rel.negate(), cond.lhs, cond.rhs)
                    conjuncts.append(BranchCond(cond, taken))
                    prev, label = label, (instr.then_label if taken else instr.else_label)
                elif isinstance(instr, Jump):
                    prev, label = label, instr.target
                elif isinstance(instr, Print):
                    atom(instr.value)
                elif isinstance(instr, Return):
                    atom(instr.value)
                    pc = PathCondition(
                        tuple(conjuncts),
                        self.symbolic,
                        f"{instr} @ {label}",
                        tuple(used_decisions),
                        tuple(fresh),
                    )
                    logger.debug("path condition", conjuncts=len(pc), steps=steps,
                                 decisions=len(used_decisions))
                    return pc

    def _condition(self, cond, atom) -> Tuple[Comparison, Optional[int]]:
        width = self.machine.bit_width
        if isinstance(cond, Comparison):
            (lt, lv), (rt, rv) = atom(cond.lhs), atom(cond.rhs)
            value = None if lv is None or rv is None else int(apply_relation(cond.rel, lv, rv, width))
            return Comparison(cond.rel, lt, rt), value
        term, value = atom(cond)
        return Comparison(Relation.NE, term, Const(0)), (None if value is None else int(value != 0))


def path_condition(program: SsaProgram, spec: PathSpec,
                   symbolic: Optional[Iterable[str]] = None,
                   machine: Optional[MachineConfig] = None) -> PathCondition:
    """Conjuncts of the path selected by `spec`."""
    return PathWalker(program, spec, symbolic, machine).run()


def enumerate_paths(program: SsaProgram, max_paths: Optional[int] = None,
                    fuel: Optional[int] = None, symbolic: Optional[Iterable[str]] = None,
                    machine: Optional[MachineConfig] = None) -> List[PathCondition]:
    """Depth-first over branch decisions, then-arm first, bounded by max_paths and fuel."""
    max_paths = max_paths if max_paths is not None else settings.path.max_paths
    fuel = fuel if fuel is not None else settings.path.fuel
    symbolic = list(symbolic) if symbolic is not None else None

    paths: List[PathCondition] = []
    truncated = 0
    stack: List[Tuple[bool, ...]] = [()]
    while stack and len(paths) < max_paths:
        prefix = stack.pop()
        try:
            paths.append(path_condition(program, PathSpec.directed(prefix, fuel), symbolic, machine))
        except DecisionUnderrunError:
            stack.append(prefix + (False,))
            stack.append(prefix + (True,))
        except FuelExhaustedError:
            truncated += 1
    logger.info("enumerated paths", paths=len(paths), truncated=truncated,
                pending=len(stack))
    return paths
