"""
STP (CVC-language) emission and parsing.

Emitted layout::

    % QF_ABV path feasibility query
    i1 : BITVECTOR(32);
    mem_arr : ARRAY BITVECTOR(32) OF BITVECTOR(32);
    ASSERT(i1 = 0hex00000001);
    ASSERT(c1 = IF BVSLT(a, b)
    THEN 0hex00000001
    ELSE 0hex00000000
    ENDIF);
    QUERY(FALSE);

Each IF/THEN/ELSE/ENDIF keyword of an ite opens its own line. The parser
accepts the emitted subset with arbitrary whitespace and `%` comments.
"""

import re
from typing import Dict, List, Optional, Tuple

import structlog

from ..core.errors import SortError
from .lexer import Token, TokenStream, scan
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

HEADER = "% QF_ABV path feasibility query"

_ARITH = {"add": "BVPLUS", "sub": "BVSUB", "mul": "BVMULT"}
_CMP = {"slt": "BVSLT", "sle": "BVSLE", "sgt": "BVSGT", "sge": "BVSGE"}
_ARITH_BACK = {v: k for k, v in _ARITH.items()}
_CMP_BACK = {v: k for k, v in _CMP.items()}


def render_literal(value: int, width: int) -> str:
    if width % 4 == 0:
        return f"0hex{value:0{width // 4}x}"
    return f"0bin{value:0{width}b}"


def render_sort(sort: Sort) -> str:
    if isinstance(sort, BitVecSort):
        return f"BITVECTOR({sort.width})"
    if isinstance(sort, ArraySort):
        return f"ARRAY BITVECTOR({sort.index_width}) OF BITVECTOR({sort.element_width})"
    return "BOOLEAN"


class StpPrinter:
    """Renders terms; `top` drops the parentheses around an assertion body."""

    def walk(self, term: Term, top: bool = False) -> str:
        return getattr(self, f"walk_{type(term).__name__.lower()}")(term, top)

    def walk_bvlit(self, term: BvLit, top: bool) -> str:
        return render_literal(term.value, term.width)

    def walk_boollit(self, term: BoolLit, top: bool) -> str:
        return "TRUE" if term.value else "FALSE"

    def walk_ref(self, term: Ref, top: bool) -> str:
        return term.name

    def walk_bvop(self, term: BvOp, top: bool) -> str:
        width = sort_of(term).width
        return f"{_ARITH[term.op]}({width}, {self.walk(term.lhs)}, {self.walk(term.rhs)})"

    def walk_bvcmp(self, term: BvCmp, top: bool) -> str:
        return f"{_CMP[term.rel]}({self.walk(term.lhs)}, {self.walk(term.rhs)})"

    def _infix(self, operator: str, args, top: bool) -> str:
        body = f" {operator} ".join(self.walk(a) for a in args)
        return body if top else f"({body})"

    def walk_eq(self, term: Eq, top: bool) -> str:
        return self._infix("=", (term.lhs, term.rhs), top)

    def walk_distinct(self, term: Distinct, top: bool) -> str:
        return self._infix("/=", (term.lhs, term.rhs), top)

    def _nary(self, operator: str, args, empty: str, top: bool) -> str:
        # STP has no unary or nullary AND/OR.
        if not args:
            return empty
        if len(args) == 1:
            return self.walk(args[0], top)
        return self._infix(operator, args, top)

    def walk_and(self, term: And, top: bool) -> str:
        return self._nary("AND", term.args, "TRUE", top)

    def walk_or(self, term: Or, top: bool) -> str:
        return self._nary("OR", term.args, "FALSE", top)

    def walk_not(self, term: Not, top: bool) -> str:
        body = f"NOT {self.walk(term.arg)}"
        return body if top else f"({body})"

    def walk_ite(self, term: Ite, top: bool) -> str:
        return (f"IF {self.walk(term.cond)}\nTHEN {self.walk(term.then)}"
                f"\nELSE {self.walk(term.orelse)}\nENDIF")

    def walk_select(self, term: Select, top: bool) -> str:
        return f"{self.walk(term.array)}[{self.walk(term.index)}]"

    def walk_store(self, term: Store, top: bool) -> str:
        return f"({self.walk(term.array)} WITH [{self.walk(term.index)}] := {self.walk(term.value)})"


def emit_stp(formula: Formula) -> str:
    printer = StpPrinter()
    lines = [HEADER]
    lines.extend(f"{name} : {render_sort(sort)};" for name, sort in formula.declarations)
    lines.extend(f"ASSERT({printer.walk(a, top=True)});" for a in formula.assertions)
    lines.append("QUERY(FALSE);")
    return "\n".join(lines) + "\n"


# Parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>%[^\n]*)
  | (?P<hex>0hex[0-9a-fA-F]+)
  | (?P<bin>0bin[01]+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>/=|:=|[()\[\],;:=])
    """,
    re.VERBOSE,
)

KEYWORDS = frozenset({
    "ASSERT", "QUERY", "TRUE", "FALSE", "IF", "THEN", "ELSE", "ENDIF", "AND", "OR",
    "NOT", "WITH", "BITVECTOR", "ARRAY", "OF", "BOOLEAN",
}) | frozenset(_ARITH.values()) | frozenset(_CMP.values())


class StpParser:
    def __init__(self, text: str, source: Optional[str] = None):
        self.stream = TokenStream(scan(text, _TOKEN, source), source)
        self.source = source
        self.sorts: Dict[str, Sort] = {}

    def parse(self) -> Formula:
        declarations: List[Tuple[str, Sort]] = []
        assertions: List[Term] = []
        s = self.stream
        while not s.at_end():
            token = s.peek()
            if token.text == "ASSERT":
                s.take()
                s.expect("(")
                body = self.expr()
                s.expect(")")
                s.expect(";")
                self._check_bool(body, token)
                assertions.append(body)
            elif token.text == "QUERY":
                s.take()
                s.expect("(")
                s.expect("FALSE")
                s.expect(")")
                s.expect(";")
                if not s.at_end():
                    raise s.error("nothing may follow QUERY(FALSE);")
            elif token.kind == "ident" and token.text not in KEYWORDS:
                names = [self.name()]
                while s.accept(","):
                    names.append(self.name())
                s.expect(":")
                sort = self.sort()
                s.expect(";")
                for name in names:
                    if name.text in self.sorts:
                        raise s.error(f"{name.text} declared twice", name)
                    self.sorts[name.text] = sort
                    declarations.append((name.text, sort))
            else:
                raise s.error(f"expected a declaration, ASSERT or QUERY, found {token.text!r}")
        return Formula(tuple(declarations), tuple(assertions))

    def name(self) -> Token:
        token = self.stream.take()
        if token.kind != "ident" or token.text in KEYWORDS:
            raise self.stream.error(f"expected a name, found {token.text!r}", token)
        return token

    def width(self) -> int:
        token = self.stream.take()
        if token.kind != "int":
            raise self.stream.error(f"expected a width, found {token.text!r}", token)
        return int(token.text)

    def bitvector(self) -> int:
        s = self.stream
        s.expect("BITVECTOR")
        s.expect("(")
        width = self.width()
        s.expect(")")
        return width

    def sort(self) -> Sort:
        s = self.stream
        if s.accept("BOOLEAN"):
            return BOOL
        if s.accept("ARRAY"):
            index = self.bitvector()
            s.expect("OF")
            return ArraySort(index, self.bitvector())
        return BitVecSort(self.bitvector())

    def expr(self) -> Term:
        first = self.comparison()
        for keyword, node in (("AND", And), ("OR", Or)):
            if self.stream.peek_text() == keyword:
                args = [first]
                while self.stream.accept(keyword):
                    args.append(self.comparison())
                return node(tuple(args))
        return first

    def comparison(self) -> Term:
        lhs = self.postfix()
        if self.stream.accept("="):
            return Eq(lhs, self.postfix())
        if self.stream.accept("/="):
            return Distinct(lhs, self.postfix())
        return lhs

    def postfix(self) -> Term:
        term = self.primary()
        while self.stream.accept("["):
            term = Select(term, self.expr())
            self.stream.expect("]")
        return term

    def primary(self) -> Term:
        s = self.stream
        token = s.take()
        if token.text == "(":
            inner = self.expr()
            if s.accept("WITH"):
                s.expect("[")
                index = self.expr()
                s.expect("]")
                s.expect(":=")
                inner = Store(inner, index, self.expr())
            s.expect(")")
            return inner
        if token.text == "NOT":
            return Not(self.postfix())
        if token.text == "IF":
            cond = self.expr()
            s.expect("THEN")
            then = self.expr()
            s.expect("ELSE")
            orelse = self.expr()
            s.expect("ENDIF")
            return Ite(cond, then, orelse)
        if token.text in ("TRUE", "FALSE"):
            return BoolLit(token.text == "TRUE")
        if token.text in _ARITH_BACK:
            s.expect("(")
            width = self.width()
            s.expect(",")
            lhs = self.expr()
            s.expect(",")
            rhs = self.expr()
            s.expect(")")
            term = BvOp(_ARITH_BACK[token.text], lhs, rhs)
            if self._sort(term, token) != BitVecSort(width):
                raise SortError(f"{token.text} declared width {width} does not match its operands",
                                source=self.source, line=token.line, column=token.column)
            return term
        if token.text in _CMP_BACK:
            s.expect("(")
            lhs = self.expr()
            s.expect(",")
            rhs = self.expr()
            s.expect(")")
            return BvCmp(_CMP_BACK[token.text], lhs, rhs)
        if token.kind == "hex":
            digits = token.text[4:]
            return BvLit(int(digits, 16), 4 * len(digits))
        if token.kind == "bin":
            digits = token.text[4:]
            return BvLit(int(digits, 2), len(digits))
        if token.kind == "ident" and token.text not in KEYWORDS:
            if token.text not in self.sorts:
                raise s.error(f"undeclared name {token.text!r}", token)
            return Ref(token.text, self.sorts[token.text])
        raise s.error(f"unexpected {token.text!r}", token)

    def _sort(self, term: Term, token: Token) -> Sort:
        try:
            return sort_of(term)
        except SortError as exc:
            raise SortError(exc.message, source=self.source, line=token.line, column=token.column) from exc

    def _check_bool(self, term: Term, token: Token) -> None:
        if not isinstance(self._sort(term, token), BoolSort):
            raise SortError("ASSERT body must be boolean", source=self.source,
                            line=token.line, column=token.column)


def parse_stp(text: str, source: Optional[str] = None) -> Formula:
    """Parse STP text in the emitted subset; errors carry line and column."""
    formula = StpParser(text, source).parse()
    logger.debug("parsed stp", declarations=len(formula.declarations),
                 assertions=len(formula.assertions))
    return formula

