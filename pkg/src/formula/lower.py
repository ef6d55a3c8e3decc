"""Lowering of path conditions to QF_ABV formulas."""

from typing import Dict, List, Optional

import structlog

from ..ir.machine import MachineConfig, default_machine
from ..ir.model import BinaryOp, Comparison, Const, Relation
from ..symbolic.pathcond import MEMORY, Arith, BranchCond, DefEquality, PathCondition, Read, StoreStep
from .terms import (
    ArraySort,
    BitVecSort,
    BvCmp,
    BvLit,
    BvOp,
    Distinct,
    Eq,
    Formula,
    Ite,
    Ref,
    Select,
    Sort,
    Store,
    Term,
)


logger = structlog.get_logger(__name__)

_OPS = {BinaryOp.ADD: "add", BinaryOp.SUB: "sub", BinaryOp.MUL: "mul"}
_RELS = {Relation.LT: "slt", Relation.LE: "sle", Relation.GT: "sgt", Relation.GE: "sge"}


class _Lowering:
    def __init__(self, machine: MachineConfig):
        self.width = machine.bit_width
        self.machine = machine
        self.bv = BitVecSort(self.width)
        self.memory = Ref(MEMORY, ArraySort(self.width, self.width))
        self.chain: Term = self.memory
        self.declared: Dict[str, Sort] = {}

    def declare(self, name: str, sort: Sort) -> Ref:
        self.declared.setdefault(name, sort)
        return Ref(name, sort)

    def atom(self, atom) -> Term:
        if isinstance(atom, Const):
            return BvLit(self.machine.wrap(atom.value), self.width)
        return self.declare(atom.name, self.bv)

    def comparison(self, cond: Comparison) -> Term:
        lhs, rhs = self.atom(cond.lhs), self.atom(cond.rhs)
        if cond.rel is Relation.EQ:
            return Eq(lhs, rhs)
        if cond.rel is Relation.NE:
            return Distinct(lhs, rhs)
        return BvCmp(_RELS[cond.rel], lhs, rhs)

    def term(self, term) -> Term:
        if isinstance(term, Arith):
            return BvOp(_OPS[term.op], self.atom(term.lhs), self.atom(term.rhs))
        if isinstance(term, Comparison):
            return Ite(self.comparison(term), BvLit(1, self.width), BvLit(0, self.width))
        if isinstance(term, Read):
            self.declare(MEMORY, self.memory.sort)
            return Select(self.chain, self.atom(term.addr))
        return self.atom(term)

    def conjunct(self, conjunct) -> Term:
        if isinstance(conjunct, DefEquality):
            # the right-hand side is lowered first so declarations follow reading order
            rhs = self.term(conjunct.term)
            return Eq(self.declare(conjunct.name, self.bv), rhs)
        if isinstance(conjunct, BranchCond):
            return self.comparison(conjunct.cond)
        if isinstance(conjunct, StoreStep):
            self.declare(MEMORY, self.memory.sort)
            index, value = self.atom(conjunct.index), self.atom(conjunct.value)
            self.chain = Store(self.chain, index, value)
            return Eq(Select(self.chain, index), value)
        raise TypeError(f"unknown conjunct {conjunct!r}")


def lower(pc: PathCondition, machine: Optional[MachineConfig] = None) -> Formula:
    """One assertion per conjunct, in order.

    Stores extend a single store chain over ``mem_arr``; every later read
    selects from the current chain.
    """
    lowering = _Lowering(machine or default_machine())
    assertions: List[Term] = [lowering.conjunct(c) for c in pc.conjuncts]
    formula = Formula(tuple(lowering.declared.items()), tuple(assertions))
    logger.debug("lowered path condition", conjuncts=len(pc), declarations=len(formula.declarations))
    return formula

