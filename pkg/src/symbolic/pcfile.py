"""
`.pc` path-condition dumps.

Header lines carry metadata, then one conjunct per line::

    # pfq path condition
    target: ret i2 @ entry
    inputs: a, b
    fresh: undef_1
    decisions: T,F
    def i2 = i1 + j1
    def x1 = mem_arr[a]
    branch T j2 >= n1
    store mem_arr[a] := v1
"""

from typing import List, Optional

from ..core.errors import PathError
from ..ir.model import BinaryOp, Comparison, Const, Relation, Var
from ..ir.parser import Token, tokenize
from .pathcond import (
    MEMORY,
    Arith,
    BranchCond,
    Conjunct,
    DefEquality,
    PathCondition,
    Read,
    StoreStep,
    parse_decisions,
)


HEADER = "# pfq path condition"

_BINARY = {op.value: op for op in BinaryOp}
_RELATIONS = {rel.value: rel for rel in Relation}


def dump_pc(pc: PathCondition) -> str:
    lines = [HEADER, f"target: {pc.target}"]
    lines.append(f"inputs: {', '.join(sorted(pc.symbolic_inputs))}")
    lines.append(f"fresh: {', '.join(pc.fresh_names)}")
    lines.append(f"decisions: {','.join('T' if d else 'F' for d in pc.decisions)}")
    for c in pc.conjuncts:
        if isinstance(c, DefEquality):
            lines.append(f"def {c}")
        elif isinstance(c, BranchCond):
            lines.append(f"branch {'T' if c.taken else 'F'} {c.cond}")
        else:
            lines.append(f"store {c}")
    return "\n".join(lines) + "\n"


class _TermReader:
    def __init__(self, tokens: List[Token], lineno: int, source: Optional[str]):
        self.tokens = tokens
        self.pos = 0
        self.lineno = lineno
        self.source = source

    def error(self, message: str) -> PathError:
        column = self.tokens[self.pos].column if self.pos < len(self.tokens) else None
        return PathError(message, source=self.source, line=self.lineno, column=column)

    def take(self) -> Token:
        if self.pos >= len(self.tokens):
            raise self.error("unexpected end of line")
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def expect(self, text: str) -> None:
        if self.take().text != text:
            self.pos -= 1
            raise self.error(f"expected {text!r}")

    def peek(self) -> Optional[str]:
        return self.tokens[self.pos].text if self.pos < len(self.tokens) else None

    def atom(self):
        token = self.take()
        if token.kind == "int":
            return Const(int(token.text))
        if token.kind == "ident":
            return Var(token.text)
        self.pos -= 1
        raise self.error(f"expected name or literal, found {token.text!r}")

    def term(self):
        if self.peek() == MEMORY and self.pos + 1 < len(self.tokens) and self.tokens[self.pos + 1].text == "[":
            self.take()
            self.expect("[")
            addr = self.atom()
            self.expect("]")
            return Read(addr)
        lhs = self.atom()
        op = self.peek()
        if op in _BINARY:
            self.take()
            return Arith(_BINARY[op], lhs, self.atom())
        if op in _RELATIONS:
            self.take()
            return Comparison(_RELATIONS[op], lhs, self.atom())
        return lhs

    def done(self) -> None:
        if self.pos != len(self.tokens):
            raise self.error(f"unexpected token {self.tokens[self.pos].text!r}")


def load_pc(text: str, source: Optional[str] = None) -> PathCondition:
    """Parse a `.pc` dump back into a PathCondition."""
    meta = {"target": "", "inputs": "", "fresh": "", "decisions": ""}
    conjuncts: List[Conjunct] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        if key.endswith(":") and key[:-1] in meta:
            meta[key[:-1]] = rest.strip()
            continue
        reader = _TermReader(tokenize(rest, lineno, source), lineno, source)
        if key == "def":
            name = reader.atom()
            if not isinstance(name, Var):
                raise reader.error("definition target must be a name")
            reader.expect("=")
            conjuncts.append(DefEquality(name.name, reader.term()))
        elif key == "branch":
            polarity = reader.take().text
            if polarity not in ("T", "F"):
                raise reader.error("branch polarity must be T or F")
            cond = reader.term()
            if not isinstance(cond, Comparison):
                raise reader.error("branch condition must be a comparison")
            conjuncts.append(BranchCond(cond, polarity == "T"))
        elif key == "store":
            array = reader.take().text
            reader.expect("[")
            index = reader.atom()
            reader.expect("]")
            reader.expect(":")
            reader.expect("=")
            conjuncts.append(StoreStep(array, index, reader.atom()))
        else:
            raise PathError(f"unknown conjunct kind {key!r}", source=source, line=lineno, column=1)
        reader.done()

    def names(value: str):
        return tuple(n.strip() for n in value.split(",") if n.strip())

    return PathCondition(
        tuple(conjuncts),
        frozenset(names(meta["inputs"])),
        meta["target"],
        parse_decisions(meta["decisions"]),
        names(meta["fresh"]),
    )
