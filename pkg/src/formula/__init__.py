"""
Formula Package

QF_ABV formulas for path feasibility queries:
- Term model and lowering of path conditions
- STP and SMT-LIB2 emitters, parsers and conversion
- IF-ENDIF / Array Write metrics and prefix splitting
- Brute-force oracle for small widths
"""

from .terms import (
    BOOL,
    And,
    ArraySort,
    BitVecSort,
    BoolLit,
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
    classify_names,
    rewidth,
    sort_of,
)
from .lower import lower
from .stp import emit_stp, parse_stp
from .smtlib2 import convert, detect_format, emit, emit_smtlib2, parse_formula, parse_smtlib2
from .metrics import QueryMetrics, count_lines, ite_ratio, metrics
from .split import PrefixSeries, prefix_sizes, split_prefixes, split_steps
from .oracle import SolveResult, Verdict, brute_solve

__all__ = [
    # Terms
    "BOOL",
    "And",
    "ArraySort",
    "BitVecSort",
    "BoolLit",
    "BvCmp",
    "BvLit",
    "BvOp",
    "Distinct",
    "Eq",
    "Formula",
    "Ite",
    "Not",
    "Or",
    "Ref",
    "Select",
    "Store",
    "classify_names",
    "rewidth",
    "sort_of",
    "lower",

    # Formats
    "convert",
    "detect_format",
    "emit",
    "emit_smtlib2",
    "emit_stp",
    "parse_formula",
    "parse_smtlib2",
    "parse_stp",

    # Metrics and splitting
    "QueryMetrics",
    "count_lines",
    "ite_ratio",
    "metrics",
    "PrefixSeries",
    "prefix_sizes",
    "split_prefixes",
    "split_steps",

    # Oracle
    "SolveResult",
    "Verdict",
    "brute_solve",
]
