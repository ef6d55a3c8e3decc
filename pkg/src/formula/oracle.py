"""
Brute-force satisfiability oracle for small-width formulas.

Only unconstrained names are enumerated. A name defined by an assertion
`x = t` is computed from `t` at that assertion, and the memory array is
enumerated lazily: the k-th distinct base index read takes the k-th cell
value of the current assignment. Assignments are tried in lexicographic
order over (free names in declaration order, then cells), so the first
model found is the least one.
"""

import itertools
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple

import structlog

from ..core.config import settings
from ..core.errors import OracleBoundError, SortError
from ..ir.machine import to_signed, wrap
from .terms import (
    And,
    ArraySort,
    BitVecSort,
    BoolLit,
    BoolSort,
    BvCmp,
    BvLit,
    BvOp,
    Distinct,
    Eq,
    Formula,
    Ite,
    Not,
    Or,
    Ref,
    Select,
    Store,
    Term,
    classify_names,
    rewidth,
    sort_of,
    walk,
)


logger = structlog.get_logger(__name__)


class Verdict(str, Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"
    TIMEOUT = "timeout"
    ERROR = "error"


@dataclass(frozen=True)
class SolveResult:
    verdict: Verdict
    model: Dict[str, int] = field(default_factory=dict)
    memory: Dict[int, int] = field(default_factory=dict)
    assignments: int = 0

    @property
    def is_sat(self) -> bool:
        return self.verdict is Verdict.SAT

    def render(self) -> str:
        lines = [self.verdict.value]
        lines.extend(f"{name} = {value}" for name, value in self.model.items())
        lines.extend(f"mem_arr[{index}] = {value}" for index, value in sorted(self.memory.items()))
        return "\n".join(lines)


@dataclass(frozen=True)
class _ArrayValue:
    writes: Tuple[Tuple[int, int], ...] = ()


class _CellBudgetExceeded(Exception):
    pass


class _Evaluator:
    def __init__(self, env: Dict[str, object], cells: Tuple[int, ...]):
        self.env = env
        self.cells = cells
        self.base: Dict[int, int] = {}

    def read_base(self, index: int) -> int:
        if index not in self.base:
            if len(self.base) >= len(self.cells):
                raise _CellBudgetExceeded()
            self.base[index] = self.cells[len(self.base)]
        return self.base[index]

    def eval(self, term: Term):
        if isinstance(term, BvLit):
            return term.value
        if isinstance(term, BoolLit):
            return term.value
        if isinstance(term, Ref):
            return self.env[term.name]
        if isinstance(term, BvOp):
            width = sort_of(term).width
            a, b = self.eval(term.lhs), self.eval(term.rhs)
            value = a + b if term.op == "add" else a - b if term.op == "sub" else a * b
            return wrap(value, width)
        if isinstance(term, BvCmp):
            width = sort_of(term.lhs).width
            a = to_signed(self.eval(term.lhs), width)
            b = to_signed(self.eval(term.rhs), width)
            return {"slt": a < b, "sle": a <= b, "sgt": a > b, "sge": a >= b}[term.rel]
        if isinstance(term, (Eq, Distinct)):
            if isinstance(sort_of(term.lhs), ArraySort):
                raise OracleBoundError("array equality is outside the oracle's fragment")
            same = self.eval(term.lhs) == self.eval(term.rhs)
            return same if isinstance(term, Eq) else not same
        if isinstance(term, And):
            return all(self.eval(a) for a in term.args)
        if isinstance(term, Or):
            return any(self.eval(a) for a in term.args)
        if isinstance(term, Not):
            return not self.eval(term.arg)
        if isinstance(term, Ite):
            return self.eval(term.then) if self.eval(term.cond) else self.eval(term.orelse)
        if isinstance(term, Select):
            array, index = self.eval(term.array), self.eval(term.index)
            for written, value in reversed(array.writes):
                if written == index:
                    return value
            return self.read_base(index)
        if isinstance(term, Store):
            array = self.eval(term.array)
            return _ArrayValue(array.writes + ((self.eval(term.index), self.eval(term.value)),))
        raise SortError(f"cannot evaluate {term!r}")


def _domain_bits(sort) -> int:
    if isinstance(sort, BitVecSort):
        return sort.width
    if isinstance(sort, BoolSort):
        return 1
    return 0


def brute_solve(formula: Formula, width_override: Optional[int] = None,
                array_cells: Optional[int] = None) -> SolveResult:
    """Exhaustive SAT/UNSAT verdict with the least model."""
    oracle = settings.oracle
    array_cells = oracle.max_array_cells if array_cells is None else array_cells
    if array_cells > oracle.max_array_cells:
        raise OracleBoundError(f"array domain of {array_cells} cells exceeds {oracle.max_array_cells}")
    if width_override is not None:
        if not 1 <= width_override <= oracle.max_width:
            raise OracleBoundError(f"width {width_override} outside 1..{oracle.max_width}")
        formula = rewidth(formula, width_override)
    formula.check()

    sorts = formula.sort_map()
    widths = [s.width for s in sorts.values() if isinstance(s, BitVecSort)]
    widths += [s.element_width for s in sorts.values() if isinstance(s, ArraySort)]
    if any(w > oracle.max_width for w in widths):
        raise OracleBoundError(f"bitvector width {max(widths)} exceeds {oracle.max_width}; "
                               f"pass a width override")

    free, defined = classify_names(formula)
    enumerated = [name for name in free if not isinstance(sorts[name], ArraySort)]
    arrays = [name for name in free if isinstance(sorts[name], ArraySort)]
    if len(arrays) > 1:
        raise OracleBoundError("the oracle supports a single memory array")
    element_width = sorts[arrays[0]].element_width if arrays else 0
    select_nodes = {node for a in formula.assertions for node in walk(a) if isinstance(node, Select)}
    cell_count = min(len(select_nodes), array_cells) if arrays else 0

    bits = sum(_domain_bits(sorts[name]) for name in enumerated) + cell_count * element_width
    if bits > oracle.max_state_bits:
        raise OracleBoundError(f"state space of 2^{bits} assignments exceeds 2^{oracle.max_state_bits}")
    logger.debug("oracle enumeration", free=len(enumerated), cells=cell_count, state_bits=bits)

    domains: List[range] = [range(1 << _domain_bits(sorts[name])) for name in enumerated]
    domains += [range(1 << element_width)] * cell_count
    defined_set = set(defined)
    tried = 0
    for assignment in itertools.product(*domains):
        tried += 1
        env: Dict[str, object] = {}
        for name, value in zip(enumerated, assignment):
            env[name] = bool(value) if isinstance(sorts[name], BoolSort) else value
        for name in arrays:
            env[name] = _ArrayValue()
        evaluator = _Evaluator(env, tuple(assignment[len(enumerated):]))
        try:
            if _satisfies(formula, evaluator, defined_set):
                model = {name: int(env[name]) for name, _ in formula.declarations
                         if name in env and not isinstance(sorts[name], ArraySort)}
                logger.debug("oracle verdict", verdict="sat", assignments=tried)
                return SolveResult(Verdict.SAT, model, dict(evaluator.base), tried)
        except _CellBudgetExceeded:
            raise OracleBoundError(f"more than {cell_count} distinct memory cells are read") from None
    logger.debug("oracle verdict", verdict="unsat", assignments=tried)
    return SolveResult(Verdict.UNSAT, assignments=tried)


def _satisfies(formula: Formula, evaluator: _Evaluator, defined: set) -> bool:
    env = evaluator.env
    for assertion in formula.assertions:
        if isinstance(assertion, Eq) and isinstance(assertion.lhs, Ref) \
                and assertion.lhs.name in defined and assertion.lhs.name not in env:
            env[assertion.lhs.name] = evaluator.eval(assertion.rhs)
        elif not evaluator.eval(assertion):
            return False
    return True
