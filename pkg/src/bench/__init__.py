"""
Bench Package

External solver benchmarking:
- Solver command templates and sequential timing runs
- Consecutive time-diff tables, CSV reports and plot data files
"""

from .harness import BenchRecord, SolverSpec, configured_solvers, parse_verdict, run_bench
from .report import CSV_HEADER, DiffTable, diff_csv, diff_table, report_csv, time_diffs, write_dat

__all__ = [
    # Harness
    "BenchRecord",
    "SolverSpec",
    "configured_solvers",
    "parse_verdict",
    "run_bench",

    # Reports
    "CSV_HEADER",
    "DiffTable",
    "diff_csv",
    "diff_table",
    "report_csv",
    "time_diffs",
    "write_dat",
]
