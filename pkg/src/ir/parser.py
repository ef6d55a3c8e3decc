"""
`.mir` parser.

Grammar (one instruction per line, `#` starts a comment)::

    program   := function+
    function  := 'func' IDENT '(' [IDENT (',' IDENT)*] ')' '{' block* '}'
    block     := IDENT ':' instr*
    instr     := IDENT '=' INT | IDENT '=' 'undef'
               | IDENT '=' operand ('+' | '-' | '*') operand
               | IDENT '=' operand rel operand
               | IDENT '=' 'load' operand
               | IDENT '=' 'phi' '[' IDENT ':' operand ']' (',' '[' IDENT ':' operand ']')*
               | 'store' operand ',' operand
               | 'print' operand
               | 'br' operand [rel operand] ',' IDENT ',' IDENT
               | 'jmp' IDENT
               | 'ret' operand
    operand   := IDENT | ['-'] INT | 'undef' | '*'
    rel       := '<' | '<=' | '>' | '>=' | '==' | '!='

`*` in operand position is an alias of `undef`, matching the starred
listings of hand-written examples.
"""

import re
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import structlog

from ..core.errors import IRSyntaxError, IRValidationError
from .cfg import ControlFlowGraph
from .model import (
    UNDEF,
    BinaryOp,
    BinOp,
    Block,
    Branch,
    Compare,
    Comparison,
    Const,
    ConstAssign,
    Function,
    Instruction,
    Jump,
    Load,
    Operand,
    Phi,
    Print,
    Program,
    Relation,
    Return,
    Store,
    Var,
)


logger = structlog.get_logger(__name__)

KEYWORDS = frozenset({"func", "phi", "load", "store", "print", "br", "jmp", "ret", "undef"})

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>==|!=|<=|>=|<|>|=|\+|-|\*|,|:|\[|\]|\(|\)|\{|\})
    """,
    re.VERBOSE,
)

_BINARY = {op.value: op for op in BinaryOp}
_RELATIONS = {rel.value: rel for rel in Relation}


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    column: int


def tokenize(line: str, lineno: int, source: Optional[str] = None) -> List[Token]:
    tokens = []
    pos = 0
    while pos < len(line):
        match = _TOKEN.match(line, pos)
        if match is None:
            raise IRSyntaxError(f"unexpected character {line[pos]!r}",
                                source=source, line=lineno, column=pos + 1)
        if match.lastgroup != "ws":
            tokens.append(Token(match.lastgroup, match.group(), pos + 1))
        pos = match.end()
    return tokens


@dataclass
class _BlockDraft:
    label: str
    line: int
    instructions: List[Tuple[Instruction, int]] = field(default_factory=list)


@dataclass
class _FunctionDraft:
    name: str
    params: Tuple[str, ...]
    line: int
    blocks: List[_BlockDraft] = field(default_factory=list)


class _LineParser:
    """Recursive-descent parser over the tokens of a single line."""

    def __init__(self, tokens: List[Token], lineno: int, source: Optional[str]):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.source = source

    def error(self, message: str, token: Optional[Token] = None) -> IRSyntaxError:
        if token is None:
            token = self.peek()
        column = token.column if token else (self.tokens[-1].column + len(self.tokens[-1].text) if self.tokens else 1)
        return IRSyntaxError(message, source=self.source, line=self.lineno, column=column)

    def peek(self) -> Optional[Token]:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> Token:
        token = self.peek()
        if token is None:
            raise self.error("unexpected end of line")
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.next()
        if token.text != text:
            raise self.error(f"expected {text!r}, found {token.text!r}", token)
        return token

    def at(self, text: str) -> bool:
        token = self.peek()
        return token is not None and token.text == text

    def identifier(self, what: str = "identifier") -> str:
        token = self.next()
        if token.kind != "ident" or token.text in KEYWORDS:
            raise self.error(f"expected {what}, found {token.text!r}", token)
        return token.text

    def done(self) -> None:
        token = self.peek()
        if token is not None:
            raise self.error(f"unexpected token {token.text!r}", token)

    def operand(self) -> Operand:
        token = self.next()
        if token.kind == "int":
            return Const(int(token.text))
        if token.text == "-":
            number = self.next()
            if number.kind != "int":
                raise self.error("expected integer after '-'", number)
            return Const(-int(number.text))
        if token.text in ("undef", "*"):
            return UNDEF
        if token.kind == "ident" and token.text not in KEYWORDS:
            return Var(token.text)
        raise self.error(f"expected operand, found {token.text!r}", token)

    def condition(self):
        lhs = self.operand()
        token = self.peek()
        if token is not None and token.text in _RELATIONS:
            self.pos += 1
            return Comparison(_RELATIONS[token.text], lhs, self.operand())
        return lhs

    def instruction(self) -> Instruction:
        head = self.peek()
        keyword = head.text if head.kind == "ident" else None
        if keyword == "store":
            self.next()
            addr = self.operand()
            self.expect(",")
            instr = Store(addr, self.operand())
        elif keyword == "print":
            self.next()
            instr = Print(self.operand())
        elif keyword == "ret":
            self.next()
            instr = Return(self.operand())
        elif keyword == "jmp":
            self.next()
            instr = Jump(self.identifier("label"))
        elif keyword == "br":
            self.next()
            cond = self.condition()
            self.expect(",")
            then_label = self.identifier("label")
            self.expect(",")
            instr = Branch(cond, then_label, self.identifier("label"))
        else:
            instr = self.assignment()
        self.done()
        return instr

    def assignment(self) -> Instruction:
        dest = self.identifier("instruction")
        self.expect("=")
        if self.at("phi"):
            self.next()
            arms = [self.phi_arm()]
            while self.at(","):
                self.next()
                arms.append(self.phi_arm())
            return Phi(dest, tuple(arms))
        if self.at("load"):
            self.next()
            return Load(dest, self.operand())
        first = self.peek()
        lhs = self.operand()
        token = self.peek()
        if token is None:
            if isinstance(lhs, Var):
                raise self.error("copy assignment is not an instruction; write `x = y + 0`", first)
            return ConstAssign(dest, lhs)
        if token.text in _BINARY:
            self.pos += 1
            return BinOp(dest, _BINARY[token.text], lhs, self.operand())
        if token.text in _RELATIONS:
            self.pos += 1
            return Compare(dest, _RELATIONS[token.text], lhs, self.operand())
        raise self.error(f"unexpected token {token.text!r}", token)

    def phi_arm(self) -> Tuple[str, Operand]:
        self.expect("[")
        label = self.identifier("label")
        self.expect(":")
        value = self.operand()
        self.expect("]")
        return label, value


class IRParser:
    """Line-oriented parser producing a validated Program."""

    def __init__(self, text: str, source: Optional[str] = None):
        self.text = text
        self.source = source

    def _error(self, cls, message: str, line: int, column: Optional[int] = None):
        return cls(message, source=self.source, line=line, column=column)

    def parse(self) -> Program:
        drafts: List[_FunctionDraft] = []
        current: Optional[_FunctionDraft] = None
        last_line = 0

        for lineno, raw in enumerate(self.text.splitlines(), 1):
            last_line = lineno
            tokens = tokenize(raw.split("#", 1)[0], lineno, self.source)
            if not tokens:
                continue
            line = _LineParser(tokens, lineno, self.source)

            if current is None:
                current = self._function_header(line, lineno)
                if line.at("}"):
                    line.next()
                    line.done()
                    drafts.append(current)
                    current = None
                else:
                    line.done()
                continue

            if len(tokens) == 1 and tokens[0].text == "}":
                drafts.append(current)
                current = None
                continue

            if len(tokens) == 2 and tokens[0].kind == "ident" and tokens[1].text == ":":
                label = tokens[0].text
                if label in KEYWORDS:
                    raise self._error(IRSyntaxError, f"keyword {label!r} cannot be a label", lineno, 1)
                current.blocks.append(_BlockDraft(label, lineno))
                continue

            if not current.blocks:
                raise self._error(IRSyntaxError, "instruction outside of a labelled block",
                                  lineno, tokens[0].column)
            current.blocks[-1].instructions.append((line.instruction(), lineno))

        if current is not None:
            raise self._error(IRSyntaxError, f"missing '}}' closing function {current.name!r}",
                              last_line + 1, 1)

        program = Program(tuple(self._build(draft) for draft in drafts))
        self._check_program(drafts)
        self._flag_unreachable(program)
        logger.debug("parsed program", source=self.source,
                     instructions=program.instruction_count())
        return program

    def _function_header(self, line: _LineParser, lineno: int) -> _FunctionDraft:
        token = line.next()
        if token.text != "func":
            raise line.error(f"expected 'func', found {token.text!r}", token)
        name = line.identifier("function name")
        line.expect("(")
        params: List[str] = []
        if not line.at(")"):
            params.append(line.identifier("parameter"))
            while line.at(","):
                line.next()
                params.append(line.identifier("parameter"))
        line.expect(")")
        line.expect("{")
        if len(set(params)) != len(params):
            raise line.error("duplicate parameter name")
        return _FunctionDraft(name, tuple(params), lineno)

    def _build(self, draft: _FunctionDraft) -> Function:
        if not draft.blocks:
            raise self._error(IRValidationError,
                              f"function {draft.name!r} has an empty body: missing terminator",
                              draft.line)

        labels = {}
        for block in draft.blocks:
            if block.label in labels:
                raise self._error(IRValidationError, f"duplicate label {block.label!r}", block.line, 1)
            labels[block.label] = block

        for block in draft.blocks:
            if not block.instructions or not block.instructions[-1][0].is_terminator:
                line = block.instructions[-1][1] if block.instructions else block.line
                raise self._error(IRValidationError,
                                  f"block {block.label!r} is missing terminator", line)
            seen_body = False
            for index, (instr, line) in enumerate(block.instructions):
                if instr.is_terminator and index != len(block.instructions) - 1:
                    raise self._error(IRValidationError,
                                      f"terminator {instr} must be the last instruction of {block.label!r}",
                                      line)
                if isinstance(instr, Phi):
                    if seen_body:
                        raise self._error(IRValidationError, "phi outside block head", line)
                else:
                    seen_body = True
                targets = list(instr.successors())
                if isinstance(instr, Phi):
                    targets.extend(label for label, _ in instr.incoming)
                for target in targets:
                    if target not in labels:
                        raise self._error(IRValidationError, f"undefined label {target!r}", line)

        return Function(
            draft.name,
            draft.params,
            tuple(Block(b.label, tuple(instr for instr, _ in b.instructions)) for b in draft.blocks),
        )

    def _flag_unreachable(self, program: Program) -> None:
        for fn in program.functions:
            reachable = ControlFlowGraph(fn).reachable
            dead = [b.label for b in fn.blocks if b.label not in reachable]
            if dead:
                logger.warning("unreachable blocks", source=self.source, function=fn.name,
                               blocks=dead)

    def _check_program(self, drafts: List[_FunctionDraft]) -> None:
        names = [draft.name for draft in drafts]
        for draft in drafts:
            if names.count(draft.name) > 1:
                raise self._error(IRValidationError, f"duplicate function {draft.name!r}", draft.line)
        if names != ["main"]:
            line = drafts[0].line if drafts else 1
            raise self._error(IRValidationError,
                              "a program defines exactly one function, named 'main'", line)


def parse_ir(text: str, source: Optional[str] = None) -> Program:
    """Parse `.mir` text into a Program, raising positioned diagnostics."""
    return IRParser(text, source).parse()
