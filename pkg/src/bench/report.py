"""
Benchmark reports: consecutive time-diff tables, CSV and gnuplot data files.

Times are written with 6 decimals and every diff is recomputed from the
written times, so a diff column can always be reproduced from its time
column.
"""

import csv
import io
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import structlog

from ..core.errors import DiffTableError
from .harness import BenchRecord


logger = structlog.get_logger(__name__)

CSV_HEADER = ("name", "solver", "lines", "conjuncts", "ite", "store", "ratio", "time", "time_diff", "verdict")


def format_seconds(value: Optional[float], places: int = 6) -> str:
    if value is None:
        return ""
    text = f"{value:.{places}f}"
    # no negative zero
    return text[1:] if text.startswith("-") and float(text) == 0 else text


def time_diffs(times: Sequence[Optional[float]]) -> List[Optional[float]]:
    """reported_time(i) - reported_time(i - 1); the first entry is blank."""
    diffs: List[Optional[float]] = [None]
    for prev, cur in zip(times, times[1:]):
        diffs.append(None if prev is None or cur is None else cur - prev)
    return diffs


def _written(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(format_seconds(value))


@dataclass(frozen=True)
class DiffTable:
    solver: str
    rows: Tuple[BenchRecord, ...]
    diffs: Tuple[Optional[float], ...]

    @property
    def times(self) -> List[Optional[float]]:
        return [r.reported_time for r in self.rows]

    def to_csv(self, places: int = 3) -> str:
        """Name, Time, Time Diff columns as in a per-solver timing table."""
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=["name", "time", "time_diff"], lineterminator="\n")
        writer.writeheader()
        for row, diff in zip(self.rows, self.diffs):
            writer.writerow({
                "name": row.formula_name,
                "time": format_seconds(row.reported_time, places),
                "time_diff": format_seconds(diff, places),
            })
        return buffer.getvalue()


def diff_table(records: Sequence[BenchRecord]) -> DiffTable:
    """Consecutive time differences over one solver's prefix series."""
    if len(records) < 2:
        raise DiffTableError(f"a diff table needs at least 2 records, got {len(records)}")
    solvers = {r.solver for r in records}
    if len(solvers) != 1:
        raise DiffTableError(f"records mix solvers: {', '.join(sorted(solvers))}")
    rows = tuple(records)
    return DiffTable(rows[0].solver, rows, tuple(time_diffs([r.reported_time for r in rows])))


def _row(record: BenchRecord, diff: Optional[float]) -> Dict[str, str]:
    return {
        "name": record.formula_name,
        "solver": record.solver,
        "lines": str(record.lines),
        "conjuncts": str(record.conjuncts),
        "ite": str(record.ite_count),
        "store": str(record.store_count),
        "ratio": "" if record.ratio is None else f"{record.ratio:.3f}",
        "time": format_seconds(record.reported_time),
        "time_diff": format_seconds(diff),
        "verdict": record.verdict.value,
    }


def group_series(records: Iterable[BenchRecord]) -> "OrderedDict[Tuple[str, str], List[BenchRecord]]":
    groups: "OrderedDict[Tuple[str, str], List[BenchRecord]]" = OrderedDict()
    for record in records:
        groups.setdefault((record.series, record.solver), []).append(record)
    return groups


def _series_diffs(records: Sequence[BenchRecord]) -> Dict[int, Optional[float]]:
    """Diff per record identity, consecutive within each (series, solver)."""
    result: Dict[int, Optional[float]] = {}
    for group in group_series(records).values():
        diffs = time_diffs([_written(r.reported_time) for r in group])
        for record, diff in zip(group, diffs):
            result[id(record)] = diff
    return result


def report_csv(records: Sequence[BenchRecord]) -> str:
    """CSV with a stable column order; header only for no records."""
    diffs = _series_diffs(records)
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(CSV_HEADER), lineterminator="\n")
    writer.writeheader()
    for record in records:
        writer.writerow(_row(record, diffs[id(record)]))
    return buffer.getvalue()


def write_dat(records: Sequence[BenchRecord], directory: Path) -> List[Path]:
    """One whitespace-separated data file per (program series, solver)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for (series, solver), group in group_series(records).items():
        diffs = time_diffs([_written(r.reported_time) for r in group])
        path = directory / f"{series}_{solver}.dat"
        lines = ["# lines conjuncts ite store time time_diff"]
        for record, diff in zip(group, diffs):
            lines.append(" ".join([
                str(record.lines), str(record.conjuncts), str(record.ite_count),
                str(record.store_count), format_seconds(record.reported_time) or "nan",
                format_seconds(diff) or "nan",
            ]))
        path.write_text("\n".join(lines) + "\n")
        written.append(path)
    logger.info("wrote plot data", files=len(written), directory=str(directory))
    return written


def diff_csv(tables: Sequence[DiffTable], places: int = 3) -> str:
    """Side-by-side layout: name, time_<s> per solver, then time_diff_<s> per solver."""
    if not tables:
        raise DiffTableError("no diff tables to lay out")
    names = [r.formula_name for r in tables[0].rows]
    for table in tables[1:]:
        if [r.formula_name for r in table.rows] != names:
            raise DiffTableError(f"diff table for {table.solver} covers different formulas")
    fields = ["name"] + [f"time_{t.solver}" for t in tables] + [f"time_diff_{t.solver}" for t in tables]
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for i, name in enumerate(names):
        row = {"name": name}
        for table in tables:
            row[f"time_{table.solver}"] = format_seconds(table.rows[i].reported_time, places)
            row[f"time_diff_{table.solver}"] = format_seconds(table.diffs[i], places)
        writer.writerow(row)
    return buffer.getvalue()
