"""
QF_ABV terms and formulas.

Terms are frozen dataclasses. Bitvector terms carry their width through
the sort of their leaves; `sort_of` checks widths at every operator and
raises SortError on the first disagreement.
"""

from dataclasses import dataclass
from typing import Dict, Iterator, List, Set, Tuple, Union

from ..core.errors import SortError


# Sorts

@dataclass(frozen=True)
class BoolSort:
    def __str__(self) -> str:
        return "Bool"


@dataclass(frozen=True)
class BitVecSort:
    width: int

    def __str__(self) -> str:
        return f"BitVec({self.width})"


@dataclass(frozen=True)
class ArraySort:
    index_width: int
    element_width: int

    def __str__(self) -> str:
        return f"Array({self.index_width}, {self.element_width})"


Sort = Union[BoolSort, BitVecSort, ArraySort]

BOOL = BoolSort()


# Terms

@dataclass(frozen=True)
class BvLit:
    value: int
    width: int


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Ref:
    name: str
    sort: Sort


@dataclass(frozen=True)
class BvOp:
    """Wrap-around arithmetic; op is one of add, sub, mul."""
    op: str
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class BvCmp:
    """Signed comparison; rel is one of slt, sle, sgt, sge."""
    rel: str
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class Eq:
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class Distinct:
    lhs: "Term"
    rhs: "Term"


@dataclass(frozen=True)
class And:
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class Or:
    args: Tuple["Term", ...]


@dataclass(frozen=True)
class Not:
    arg: "Term"


@dataclass(frozen=True)
class Ite:
    cond: "Term"
    then: "Term"
    orelse: "Term"


@dataclass(frozen=True)
class Select:
    array: "Term"
    index: "Term"


@dataclass(frozen=True)
class Store:
    array: "Term"
    index: "Term"
    value: "Term"


Term = Union[BvLit, BoolLit, Ref, BvOp, BvCmp, Eq, Distinct, And, Or, Not, Ite, Select, Store]

BV_OPS = ("add", "sub", "mul")
BV_RELS = ("slt", "sle", "sgt", "sge")


def children(term: Term) -> Tuple[Term, ...]:
    if isinstance(term, (BvOp, BvCmp, Eq, Distinct)):
        return (term.lhs, term.rhs)
    if isinstance(term, (And, Or)):
        return term.args
    if isinstance(term, Not):
        return (term.arg,)
    if isinstance(term, Ite):
        return (term.cond, term.then, term.orelse)
    if isinstance(term, Select):
        return (term.array, term.index)
    if isinstance(term, Store):
        return (term.array, term.index, term.value)
    return ()


def walk(term: Term) -> Iterator[Term]:
    """Pre-order traversal, left to right."""
    stack = [term]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(children(node)))


def sort_of(term: Term) -> Sort:
    if isinstance(term, BvLit):
        return BitVecSort(term.width)
    if isinstance(term, BoolLit):
        return BOOL
    if isinstance(term, Ref):
        return term.sort
    if isinstance(term, BvOp):
        return _same_bv(term.lhs, term.rhs, term.op)
    if isinstance(term, BvCmp):
        _same_bv(term.lhs, term.rhs, term.rel)
        return BOOL
    if isinstance(term, (Eq, Distinct)):
        a, b = sort_of(term.lhs), sort_of(term.rhs)
        if a != b:
            raise SortError(f"equality between {a} and {b}")
        return BOOL
    if isinstance(term, (And, Or)):
        for arg in term.args:
            _expect_bool(arg)
        return BOOL
    if isinstance(term, Not):
        _expect_bool(term.arg)
        return BOOL
    if isinstance(term, Ite):
        _expect_bool(term.cond)
        a, b = sort_of(term.then), sort_of(term.orelse)
        if a != b:
            raise SortError(f"ite branches of sorts {a} and {b}")
        return a
    if isinstance(term, Select):
        array = _expect_array(term.array)
        _expect_width(term.index, array.index_width, "select index")
        return BitVecSort(array.element_width)
    if isinstance(term, Store):
        array = _expect_array(term.array)
        _expect_width(term.index, array.index_width, "store index")
        _expect_width(term.value, array.element_width, "store value")
        return array
    raise SortError(f"unknown term {term!r}")


def _same_bv(lhs: Term, rhs: Term, what: str) -> BitVecSort:
    a, b = sort_of(lhs), sort_of(rhs)
    if not isinstance(a, BitVecSort) or a != b:
        raise SortError(f"{what} applied to {a} and {b}")
    return a


def _expect_bool(term: Term) -> None:
    if sort_of(term) != BOOL:
        raise SortError(f"expected a boolean, found {sort_of(term)}")


def _expect_array(term: Term) -> ArraySort:
    sort = sort_of(term)
    if not isinstance(sort, ArraySort):
        raise SortError(f"expected an array, found {sort}")
    return sort


def _expect_width(term: Term, width: int, what: str) -> None:
    if sort_of(term) != BitVecSort(width):
        raise SortError(f"{what} must be BitVec({width}), found {sort_of(term)}")


@dataclass(frozen=True)
class Formula:
    declarations: Tuple[Tuple[str, Sort], ...] = ()
    assertions: Tuple[Term, ...] = ()

    def check(self) -> "Formula":
        """Raise SortError unless every assertion is a well-sorted boolean."""
        declared = dict(self.declarations)
        for term in self.assertions:
            if sort_of(term) != BOOL:
                raise SortError("assertions must be boolean")
            for node in walk(term):
                if isinstance(node, Ref) and declared.get(node.name) != node.sort:
                    raise SortError(f"{node.name} is not declared as {node.sort}")
        return self

    def sort_map(self) -> Dict[str, Sort]:
        return dict(self.declarations)

    @property
    def free_names(self) -> Tuple[str, ...]:
        return classify_names(self)[0]


def classify_names(formula: Formula) -> Tuple[Tuple[str, ...], Tuple[str, ...]]:
    """(free, defined) names, each in declaration order.

    A name is defined by the first assertion `x = t` in which it is still
    unknown and every name of `t` is known; every other name is free.
    """
    known: Set[str] = set()
    defined: List[str] = []
    free: Set[str] = set()
    for term in formula.assertions:
        if isinstance(term, Eq) and isinstance(term.lhs, Ref) \
                and isinstance(term.lhs.sort, BitVecSort) and term.lhs.name not in known:
            for node in walk(term.rhs):
                if isinstance(node, Ref) and node.name not in known:
                    known.add(node.name)
                    free.add(node.name)
            if term.lhs.name not in known:
                known.add(term.lhs.name)
                defined.append(term.lhs.name)
                continue
        for node in walk(term):
            if isinstance(node, Ref) and node.name not in known:
                known.add(node.name)
                free.add(node.name)
    order = [name for name, _ in formula.declarations]
    free.update(name for name in order if name not in known)
    return (
        tuple(name for name in order if name in free),
        tuple(name for name in order if name in defined),
    )


def rewidth(formula: Formula, width: int) -> Formula:
    """Same formula over `width`-bit vectors; literals are truncated."""
    def sort(s: Sort) -> Sort:
        if isinstance(s, BitVecSort):
            return BitVecSort(width)
        if isinstance(s, ArraySort):
            return ArraySort(width, width)
        return s

    mask = (1 << width) - 1

    def term(t: Term) -> Term:
        if isinstance(t, BvLit):
            return BvLit(t.value & mask, width)
        if isinstance(t, Ref):
            return Ref(t.name, sort(t.sort))
        if isinstance(t, (BvOp, BvCmp)):
            return type(t)(t.op if isinstance(t, BvOp) else t.rel, term(t.lhs), term(t.rhs))
        if isinstance(t, (Eq, Distinct)):
            return type(t)(term(t.lhs), term(t.rhs))
        if isinstance(t, (And, Or)):
            return type(t)(tuple(term(a) for a in t.args))
        if isinstance(t, Not):
            return Not(term(t.arg))
        if isinstance(t, Ite):
            return Ite(term(t.cond), term(t.then), term(t.orelse))
        if isinstance(t, Select):
            return Select(term(t.array), term(t.index))
        if isinstance(t, Store):
            return Store(term(t.array), term(t.index), term(t.value))
        return t

    return Formula(
        tuple((name, sort(s)) for name, s in formula.declarations),
        tuple(term(a) for a in formula.assertions),
    )
