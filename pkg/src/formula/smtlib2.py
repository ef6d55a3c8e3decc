"""
SMT-LIB2 emission and parsing, plus STP <-> SMT-LIB2 conversion.

One command per line::

    (set-logic QF_ABV)
    (declare-fun i1 () (_ BitVec 32))
    (assert (= i1 (_ bv1 32)))
    (check-sat)
"""

import re
from typing import Dict, List, Optional, Tuple, Union

import structlog

from ..core.config import OutputFormat
from ..core.errors import SortError
from .lexer import Token, TokenStream, scan
from .stp import emit_stp, parse_stp
from .terms import (
    BOOL,
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
    Sort,
    Store,
    Term,
    sort_of,
)


logger = structlog.get_logger(__name__)

LOGIC = "QF_ABV"

_ARITH = {"add": "bvadd", "sub": "bvsub", "mul": "bvmul"}
_CMP = {"slt": "bvslt", "sle": "bvsle", "sgt": "bvsgt", "sge": "bvsge"}


def render_sort(sort: Sort) -> str:
    if isinstance(sort, BitVecSort):
        return f"(_ BitVec {sort.width})"
    if isinstance(sort, ArraySort):
        return f"(Array (_ BitVec {sort.index_width}) (_ BitVec {sort.element_width}))"
    return "Bool"


class SmtPrinter:
    def walk(self, term: Term) -> str:
        return getattr(self, f"walk_{type(term).__name__.lower()}")(term)

    def walk_nary(self, operator: str, args) -> str:
        return f"({operator} {' '.join(self.walk(a) for a in args)})"

    def walk_bvlit(self, term: BvLit) -> str:
        return f"(_ bv{term.value} {term.width})"

    def walk_boollit(self, term: BoolLit) -> str:
        return "true" if term.value else "false"

    def walk_ref(self, term: Ref) -> str:
        return term.name

    def walk_bvop(self, term: BvOp) -> str:
        return self.walk_nary(_ARITH[term.op], (term.lhs, term.rhs))

    def walk_bvcmp(self, term: BvCmp) -> str:
        return self.walk_nary(_CMP[term.rel], (term.lhs, term.rhs))

    def walk_eq(self, term: Eq) -> str:
        return self.walk_nary("=", (term.lhs, term.rhs))

    def walk_distinct(self, term: Distinct) -> str:
        return self.walk_nary("distinct", (term.lhs, term.rhs))

    def walk_and(self, term: And) -> str:
        return self.walk_nary("and", term.args) if term.args else "true"

    def walk_or(self, term: Or) -> str:
        return self.walk_nary("or", term.args) if term.args else "false"

    def walk_not(self, term: Not) -> str:
        return self.walk_nary("not", (term.arg,))

    def walk_ite(self, term: Ite) -> str:
        return self.walk_nary("ite", (term.cond, term.then, term.orelse))

    def walk_select(self, term: Select) -> str:
        return self.walk_nary("select", (term.array, term.index))

    def walk_store(self, term: Store) -> str:
        return self.walk_nary("store", (term.array, term.index, term.value))


def emit_smtlib2(formula: Formula) -> str:
    printer = SmtPrinter()
    lines = [f"(set-logic {LOGIC})"]
    lines.extend(f"(declare-fun {name} () {render_sort(sort)})" for name, sort in formula.declarations)
    lines.extend(f"(assert {printer.walk(a)})" for a in formula.assertions)
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"


# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>;[^\n]*)
  | (?P<lparen>\()
  | (?P<rparen>\))
  | (?P<hex>\#x[0-9a-fA-F]+)
  | (?P<bin>\#b[01]+)
  | (?P<int>\d+)
  | (?P<string>"(?:[^"]|"")*")
  | (?P<keyword>:[A-Za-z0-9_\-.!@$%^&*+=<>?/~]+)
  | (?P<symbol>[A-Za-z_\-.!@$%^&*+=<>?/~][A-Za-z0-9_\-.!@$%^&*+=<>?/~]*|\|[^|]*\|)
    """,
    re.VERBOSE,
)

SExpr = Union[Token, List["SExpr"]]


def read_sexprs(text: str, source: Optional[str] = None) -> List[Tuple[Token, List[SExpr]]]:
    """Top-level lists paired with their opening token."""
    stream = TokenStream(scan(text, _TOKEN, source), source)
    result = []
    while not stream.at_end():
        opening = stream.peek()
        if opening.kind != "lparen":
            raise stream.error(f"expected '(', found {opening.text!r}")
        result.append((opening, _read_list(stream)))
    return result


def _read_list(stream: TokenStream) -> List[SExpr]:
    opening = stream.expect("(")
    items: List[SExpr] = []
    while True:
        token = stream.peek()
        if token is None:
            raise stream.error("unbalanced '('", opening)
        if token.kind == "rparen":
            stream.take()
            return items
        if token.kind == "lparen":
            items.append(_read_list(stream))
        else:
            items.append(stream.take())


class SmtParser:
    def __init__(self, text: str, source: Optional[str] = None):
        self.text = text
        self.source = source
        self.sorts: Dict[str, Sort] = {}
        self.stream = TokenStream([], source)

    def error(self, message: str, where: SExpr):
        return self.stream.error(message, _first_token(where))

    def parse(self) -> Formula:
        declarations: List[Tuple[str, Sort]] = []
        assertions: List[Term] = []
        for opening, command in read_sexprs(self.text, self.source):
            if not command or not isinstance(command[0], Token):
                raise self.stream.error("expected a command", opening)
            head = command[0].text
            if head == "declare-fun":
                if len(command) != 4 or not isinstance(command[1], Token) or command[2] != []:
                    raise self.error("declare-fun takes a name, () and a sort", opening)
                name = _symbol(command[1].text)
                if name in self.sorts:
                    raise self.error(f"{name} declared twice", command[1])
                sort = self.sort(command[3])
                self.sorts[name] = sort
                declarations.append((name, sort))
            elif head == "declare-const":
                if len(command) != 3 or not isinstance(command[1], Token):
                    raise self.error("declare-const takes a name and a sort", opening)
                name = _symbol(command[1].text)
                sort = self.sort(command[2])
                self.sorts[name] = sort
                declarations.append((name, sort))
            elif head == "assert":
                if len(command) != 2:
                    raise self.error("assert takes one term", opening)
                term = self.term(command[1])
                if not isinstance(self._sort(term, command[1]), BoolSort):
                    raise SortError("asserted term must be boolean", source=self.source,
                                    line=opening.line, column=opening.column)
                assertions.append(term)
            elif head in ("set-logic", "set-info", "set-option", "check-sat", "exit", "get-model"):
                continue
            else:
                raise self.error(f"unsupported command {head!r}", command[0])
        return Formula(tuple(declarations), tuple(assertions))

    def sort(self, expr: SExpr) -> Sort:
        if isinstance(expr, Token):
            if expr.text == "Bool":
                return BOOL
            raise self.error(f"unknown sort {expr.text!r}", expr)
        if len(expr) == 3 and _texts(expr[:2]) == ["_", "BitVec"] and isinstance(expr[2], Token):
            return BitVecSort(int(expr[2].text))
        if len(expr) == 3 and _texts(expr[:1]) == ["Array"]:
            index, element = self.sort(expr[1]), self.sort(expr[2])
            if isinstance(index, BitVecSort) and isinstance(element, BitVecSort):
                return ArraySort(index.width, element.width)
        raise self.error("unsupported sort", expr)

    def term(self, expr: SExpr) -> Term:
        if isinstance(expr, Token):
            if expr.kind == "hex":
                digits = expr.text[2:]
                return BvLit(int(digits, 16), 4 * len(digits))
            if expr.kind == "bin":
                digits = expr.text[2:]
                return BvLit(int(digits, 2), len(digits))
            if expr.text in ("true", "false"):
                return BoolLit(expr.text == "true")
            if expr.kind == "symbol":
                name = _symbol(expr.text)
                if name not in self.sorts:
                    raise self.error(f"undeclared name {name!r}", expr)
                return Ref(name, self.sorts[name])
            raise self.error(f"unexpected {expr.text!r}", expr)
        if not expr:
            raise self.error("empty term", expr)
        head = expr[0]
        if isinstance(head, list):
            raise self.error("unsupported term head", head)
        if head.text == "_":
            if len(expr) == 3 and isinstance(expr[1], Token) and expr[1].text.startswith("bv") \
                    and expr[1].text[2:].isdigit() and isinstance(expr[2], Token):
                return BvLit(int(expr[1].text[2:]), int(expr[2].text))
            raise self.error("malformed indexed literal", expr)
        args = [self.term(arg) for arg in expr[1:]]
        term = self._apply(head, args)
        self._sort(term, expr)
        return term

    def _apply(self, head: Token, args: List[Term]) -> Term:
        op = head.text
        arity = {"not": 1, "ite": 3, "select": 2, "store": 3, "=": 2, "distinct": 2}
        arity.update({name: 2 for name in _ARITH.values()})
        arity.update({name: 2 for name in _CMP.values()})
        if op in ("and", "or"):
            return (And if op == "and" else Or)(tuple(args))
        if op not in arity:
            raise self.error(f"unsupported operator {op!r}", head)
        if len(args) != arity[op]:
            raise self.error(f"{op} takes {arity[op]} arguments, found {len(args)}", head)
        for name, value in _ARITH.items():
            if value == op:
                return BvOp(name, *args)
        for name, value in _CMP.items():
            if value == op:
                return BvCmp(name, *args)
        return {
            "not": lambda: Not(args[0]),
            "ite": lambda: Ite(*args),
            "select": lambda: Select(*args),
            "store": lambda: Store(*args),
            "=": lambda: Eq(*args),
            "distinct": lambda: Distinct(*args),
        }[op]()

    def _sort(self, term: Term, where: SExpr) -> Sort:
        try:
            return sort_of(term)
        except SortError as exc:
            token = _first_token(where)
            raise SortError(exc.message, source=self.source,
                            line=token.line if token else None,
                            column=token.column if token else None) from exc


def _first_token(expr: SExpr) -> Optional[Token]:
    if isinstance(expr, Token):
        return expr
    for item in expr:
        token = _first_token(item)
        if token is not None:
            return token
    return None


def _texts(items: List[SExpr]) -> List[str]:
    return [item.text if isinstance(item, Token) else "" for item in items]


def _symbol(text: str) -> str:
    return text[1:-1] if text.startswith("|") else text


def parse_smtlib2(text: str, source: Optional[str] = None) -> Formula:
    """Parse SMT-LIB2 text in the emitted subset (also `#x`/`#b` literals, declare-const)."""
    formula = SmtParser(text, source).parse()
    logger.debug("parsed smtlib2", declarations=len(formula.declarations),
                 assertions=len(formula.assertions))
    return formula


def detect_format(text: str) -> OutputFormat:
    """SMT-LIB2 files open with a parenthesis; STP files never do."""
    for line in text.splitlines():
        stripped = line.strip()
        if not stripped or stripped.startswith(("%", ";")):
            continue
        return OutputFormat.SMTLIB2 if stripped.startswith("(") else OutputFormat.STP
    return OutputFormat.STP


def parse_formula(text: str, source: Optional[str] = None,
                  fmt: Optional[OutputFormat] = None) -> Formula:
    fmt = fmt or detect_format(text)
    return parse_smtlib2(text, source) if fmt == OutputFormat.SMTLIB2 else parse_stp(text, source)


def emit(formula: Formula, fmt: OutputFormat) -> str:
    return emit_smtlib2(formula) if fmt == OutputFormat.SMTLIB2 else emit_stp(formula)


def convert(text: str, to: OutputFormat = OutputFormat.SMTLIB2, source: Optional[str] = None) -> str:
    """Re-emit `text` in the other format; STP to SMT-LIB2 by default."""
    source_fmt = OutputFormat.STP if to == OutputFormat.SMTLIB2 else OutputFormat.SMTLIB2
    return emit(parse_formula(text, source, source_fmt), to)
