"""Ratio and time-diff arithmetic on published table rows."""

import pytest

from src.bench import diff_table
from src.bench.harness import BenchRecord
from src.formula import Verdict, ite_ratio


pytestmark = pytest.mark.acceptance


@pytest.mark.parametrize("ite, store, ratio", [
    (7052, 10889, "0.647"),
    (23997, 27519, "0.872"),
    (104030, 125684, "0.827"),
    (118503, 138054, "0.858"),
])
def test_ite_store_ratio(ite, store, ratio):
    assert f"{ite_ratio(ite, store):.3f}" == ratio


STP_TIMES = [0.004, 0.006, 0.007, 0.007, 0.010, 0.012, 0.014, 0.016, 0.018, 0.022, 0.020, 0.024, 0.022]
TIME_DIFFS = ["", "0.002", "0.001", "0.000", "0.003", "0.002", "0.002", "0.002", "0.002",
              "0.004", "-0.002", "0.004", "-0.002"]


def test_time_diff_column():
    records = [BenchRecord(f"l1list_tr1_{n}.stp", "stp", 0, 0, 0, 0, None, (t,), Verdict.SAT)
               for n, t in enumerate(STP_TIMES, 1)]
    rows = [line.split(",") for line in diff_table(records).to_csv().splitlines()[1:]]
    assert [time for _, time, _ in rows] == [f"{t:.3f}" for t in STP_TIMES]
    assert [diff for _, _, diff in rows] == TIME_DIFFS
