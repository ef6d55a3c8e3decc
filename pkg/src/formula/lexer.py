"""Position-tracking tokenizer shared by the STP and SMT-LIB2 readers."""

import re
from dataclasses import dataclass
from typing import List, Optional, Pattern

from ..core.errors import FormulaSyntaxError


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def scan(text: str, pattern: Pattern, source: Optional[str] = None,
         skip: frozenset = frozenset({"ws", "comment"})) -> List[Token]:
    """Tokens of `text`; the named groups of `pattern` are the token kinds."""
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        match = pattern.match(text, pos)
        if match is None:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", source=source,
                                     line=line, column=pos - line_start + 1)
        kind = match.lastgroup
        if kind not in skip:
            tokens.append(Token(kind, match.group(), line, pos - line_start + 1))
        chunk = match.group()
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            line_start = pos + chunk.rindex("\n") + 1
        pos = match.end()
    return tokens


class TokenStream:
    def __init__(self, tokens: List[Token], source: Optional[str] = None):
        self.tokens = tokens
        self.pos = 0
        self.source = source

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def peek(self, offset: int = 0) -> Optional[Token]:
        index = self.pos + offset
        return self.tokens[index] if index < len(self.tokens) else None

    def peek_text(self, offset: int = 0) -> Optional[str]:
        token = self.peek(offset)
        return token.text if token else None

    def error(self, message: str, token: Optional[Token] = None) -> FormulaSyntaxError:
        token = token or self.peek() or (self.tokens[-1] if self.tokens else None)
        if token is None:
            return FormulaSyntaxError(message, source=self.source, line=1, column=1)
        return FormulaSyntaxError(message, source=self.source, line=token.line, column=token.column)

    def take(self) -> Token:
        token = self.peek()
        if token is None:
            raise self.error("unexpected end of input")
        self.pos += 1
        return token

    def expect(self, text: str) -> Token:
        token = self.peek()
        if token is None:
            raise self.error(f"expected {text!r}, found end of input")
        if token.text != text:
            raise self.error(f"expected {text!r}, found {token.text!r}")
        self.pos += 1
        return token

    def accept(self, text: str) -> bool:
        if self.peek_text() == text:
            self.pos += 1
            return True
        return False
