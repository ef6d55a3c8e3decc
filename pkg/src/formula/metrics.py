"""
Structural query metrics: line counts, IF-ENDIF and Array Write counts.

The counts are taken on the term tree and cross-checked against the
token occurrences of both emitted texts.
"""

from typing import Optional

import structlog
from pydantic import BaseModel, ConfigDict

from .smtlib2 import emit_smtlib2
from .stp import emit_stp
from .terms import Formula, Ite, Store, walk


logger = structlog.get_logger(__name__)


class QueryMetrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    lines_stp: int
    lines_smt2: int
    ite_count: int
    store_count: int
    ratio: Optional[float] = None

    @property
    def lines(self) -> int:
        return self.lines_stp

    @property
    def conciseness(self) -> float:
        """lines(stp) / lines(smt2)."""
        return self.lines_stp / self.lines_smt2 if self.lines_smt2 else 0.0

    def format_ratio(self) -> str:
        return "" if self.ratio is None else f"{self.ratio:.3f}"


def ite_ratio(ite_count: int, store_count: int) -> Optional[float]:
    """IF-ENDIF per Array Write, truncated to 3 decimals; None without stores."""
    if store_count == 0:
        return None
    return (ite_count * 1000 // store_count) / 1000


def count_lines(text: str) -> int:
    return sum(1 for line in text.splitlines() if line.strip())


def count_nodes(formula: Formula) -> tuple:
    ite = store = 0
    for assertion in formula.assertions:
        for node in walk(assertion):
            if isinstance(node, Ite):
                ite += 1
            elif isinstance(node, Store):
                store += 1
    return ite, store


def count_tokens(stp_text: str, smt2_text: str) -> dict:
    return {
        "ite_stp": stp_text.count("ENDIF"),
        "ite_smt2": smt2_text.count("(ite "),
        "store_stp": stp_text.count(" WITH ["),
        "store_smt2": smt2_text.count("(store "),
    }


def metrics(formula: Formula, stp_text: Optional[str] = None,
            smt2_text: Optional[str] = None) -> QueryMetrics:
    stp_text = stp_text if stp_text is not None else emit_stp(formula)
    smt2_text = smt2_text if smt2_text is not None else emit_smtlib2(formula)
    ite, store = count_nodes(formula)
    tokens = count_tokens(stp_text, smt2_text)
    if (tokens["ite_stp"], tokens["ite_smt2"], tokens["store_stp"], tokens["store_smt2"]) \
            != (ite, ite, store, store):
        logger.warning("metric cross-check mismatch", ite=ite, store=store, **tokens)
    return QueryMetrics(
        lines_stp=count_lines(stp_text),
        lines_smt2=count_lines(smt2_text),
        ite_count=ite,
        store_count=store,
        ratio=ite_ratio(ite, store),
    )
