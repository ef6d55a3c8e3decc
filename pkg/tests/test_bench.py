import csv
import io
import os
import shutil
import subprocess
import time
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.bench import SolverSpec, configured_solvers, diff_table, report_csv, run_bench, write_dat
from src.bench.harness import BenchRecord, parse_verdict, peak_memory_kb
from src.bench.report import CSV_HEADER, diff_csv, format_seconds, time_diffs
from src.core.config import fixture_path
from src.core.errors import ConfigError, DiffTableError
from src.formula import Verdict


PAPER_TIMES = [0.004, 0.006, 0.007, 0.007, 0.010, 0.012, 0.014, 0.016, 0.018, 0.022, 0.020, 0.024, 0.022]


def record(name: str, time: float = None, solver: str = "stp", **kwargs) -> BenchRecord:
    times = () if time is None else (time,)
    return BenchRecord(name, solver, 8, 3, 0, 0, None, times, Verdict.SAT, **kwargs)


@pytest.fixture
def query_file(tmp_path) -> Path:
    path = tmp_path / "query_1.stp"
    path.write_text(fixture_path("paper_query.stp").read_text())
    return path


@pytest.fixture
def no_solver_env(monkeypatch):
    for key in list(os.environ):
        if key.upper().startswith("PFQ_SOLVER_"):
            monkeypatch.delenv(key)
    return monkeypatch


def completed(stdout: str) -> subprocess.CompletedProcess:
    return subprocess.CompletedProcess(args=[], returncode=0, stdout=stdout, stderr="")


# Solver specs

def test_spec_command():
    spec = SolverSpec.parse("stp = stp --SMTLIB2 {file}")
    assert spec.name == "stp"
    assert spec.command(Path("q.smt2")) == ["stp", "--SMTLIB2", "q.smt2"]


@pytest.mark.parametrize("template", ["stp", "stp {file} {file}"])
def test_spec_needs_one_placeholder(template):
    with pytest.raises(ValidationError, match="exactly one"):
        SolverSpec(name="stp", command_template=template)


def test_spec_from_env(no_solver_env):
    no_solver_env.setenv("PFQ_SOLVER_Z3", "z3 -smt2 {file}")
    assert SolverSpec.parse("z3").command_template == "z3 -smt2 {file}"
    with pytest.raises(ConfigError, match="PFQ_SOLVER_CVC5"):
        SolverSpec.from_env("cvc5")


def test_configured_solvers(no_solver_env):
    assert configured_solvers() == []
    no_solver_env.setenv("PFQ_SOLVER_Z3", "z3 {file}")
    no_solver_env.setenv("PFQ_SOLVER_STP", "stp {file}")
    assert [s.name for s in configured_solvers()] == ["stp", "z3"]


@pytest.mark.parametrize("stdout, verdict", [
    ("sat\n", Verdict.SAT),
    ("unsat\n", Verdict.UNSAT),
    ("  unsat  \n(model)\n", Verdict.UNSAT),
    ("Invalid.\n", Verdict.SAT),
    ("Valid.\n", Verdict.UNSAT),
    ("unknown\n", Verdict.UNKNOWN),
    ("unsatisfiable\n", Verdict.UNKNOWN),
    ("", Verdict.UNKNOWN),
])
def test_parse_verdict(stdout, verdict):
    assert parse_verdict(stdout) is verdict


# Harness

def test_run_bench_reports_the_median(query_file, mocker):
    run = mocker.patch("src.bench.harness.subprocess.run", return_value=completed("sat\n"))
    mocker.patch("src.bench.harness.time.perf_counter", side_effect=[0.0, 0.5, 1.0, 1.2, 2.0, 2.9])
    spec = SolverSpec(name="fake", command_template="fake-solver {file}", timeout=5)

    [rec] = run_bench([query_file], [spec], reps=3, measure_memory=False)

    assert run.call_count == 3
    run.assert_called_with(["fake-solver", str(query_file)], capture_output=True, text=True, timeout=5)
    assert rec.reps == 3
    assert rec.reported_time == pytest.approx(0.5)
    assert rec.verdict is Verdict.SAT
    assert (rec.lines, rec.conjuncts, rec.ite_count, rec.store_count, rec.ratio) == (8, 3, 0, 0, None)
    assert rec.series == "query"


def test_timeout_stops_the_repetitions(query_file, mocker):
    mocker.patch("src.bench.harness.subprocess.run",
                 side_effect=subprocess.TimeoutExpired(cmd="fake", timeout=1))
    spec = SolverSpec(name="fake", command_template="fake {file}", timeout=1)
    [rec] = run_bench([query_file], [spec], reps=5, measure_memory=False)
    assert rec.verdict is Verdict.TIMEOUT
    assert rec.reps == 1


def test_missing_solver_becomes_an_error_record(query_file, mocker, log_events):
    mocker.patch("src.bench.harness.subprocess.run", side_effect=FileNotFoundError("no such file"))
    spec = SolverSpec(name="ghost", command_template="ghost {file}")
    [rec] = run_bench([query_file], [spec], reps=2, measure_memory=False)
    assert rec.verdict is Verdict.ERROR
    assert rec.times == ()
    assert rec.reported_time is None
    assert "ghost" in rec.error
    assert any(e["event"] == "solver not found" and e["log_level"] == "error" for e in log_events)


def test_run_bench_rejects_zero_reps(query_file):
    with pytest.raises(ConfigError):
        run_bench([query_file], [SolverSpec(name="x", command_template="x {file}")], reps=0)


def test_peak_memory_without_solver(mocker):
    mocker.patch("src.bench.harness.psutil.Popen", side_effect=FileNotFoundError)
    assert peak_memory_kb(SolverSpec(name="x", command_template="x {file}"), Path("q")) is None


def test_series_strips_the_section_number():
    assert record("l1list_tr1_12.stp").series == "l1list_tr1"
    assert record("single.smt2").series == "single"


def test_dispatch_overhead_against_a_noop_solver(query_file):
    noop = shutil.which("true")
    if noop is None:
        pytest.skip("no `true` executable on this platform")
    direct = []
    for _ in range(5):
        start = time.perf_counter()
        subprocess.run([noop, str(query_file)], capture_output=True, text=True)
        direct.append(time.perf_counter() - start)

    spec = SolverSpec(name="noop", command_template=f"{noop} {{file}}", timeout=10)
    start = time.perf_counter()
    [rec] = run_bench([query_file], [spec], reps=5, measure_memory=False)
    per_call = (time.perf_counter() - start) / 5

    assert rec.reps == 5
    assert rec.verdict is Verdict.UNKNOWN
    assert per_call - float(np.median(direct)) < 0.05


# Reports

def test_format_seconds():
    assert format_seconds(0.0123456789) == "0.012346"
    assert format_seconds(-0.0000001) == "0.000000"
    assert format_seconds(-0.0021, 3) == "-0.002"
    assert format_seconds(None) == ""


def test_time_diffs():
    assert time_diffs([1.0, None, 3.0, 4.5]) == [None, None, None, 1.5]


def test_diff_table_of_a_prefix_series():
    records = [record(f"l1list_tr1_{n}.stp", t) for n, t in enumerate(PAPER_TIMES, 1)]
    table = diff_table(records)
    lines = table.to_csv().splitlines()
    assert lines[0] == "name,time,time_diff"
    assert lines[1] == "l1list_tr1_1.stp,0.004,"
    assert [line.rsplit(",", 1)[1] for line in lines[2:]] == [
        "0.002", "0.001", "0.000", "0.003", "0.002", "0.002", "0.002", "0.002",
        "0.004", "-0.002", "0.004", "-0.002",
    ]


def test_diff_table_errors():
    with pytest.raises(DiffTableError):
        diff_table([record("a_1.stp", 0.1)])
    with pytest.raises(DiffTableError, match="mix solvers"):
        diff_table([record("a_1.stp", 0.1), record("a_2.stp", 0.2, solver="z3")])


def test_report_csv():
    assert report_csv([]) == ",".join(CSV_HEADER) + "\n"
    text = report_csv([record("a_1.stp", 0.25), record("a_2.stp", 0.5), record("b_1.stp", 1.0)])
    rows = text.splitlines()
    assert rows[0] == "name,solver,lines,conjuncts,ite,store,ratio,time,time_diff,verdict"
    assert rows[1] == "a_1.stp,stp,8,3,0,0,,0.250000,,sat"
    assert rows[2] == "a_2.stp,stp,8,3,0,0,,0.500000,0.250000,sat"
    # a new series starts without a diff
    assert rows[3] == "b_1.stp,stp,8,3,0,0,,1.000000,,sat"


def test_write_dat(tmp_path):
    records = [record("l1list_tr1_1.stp", 0.004), record("l1list_tr1_2.stp", 0.006),
               record("sqlite_tr5_1.stp")]
    paths = write_dat(records, tmp_path / "plots")
    assert [p.name for p in paths] == ["l1list_tr1_stp.dat", "sqlite_tr5_stp.dat"]
    assert paths[0].read_text() == (
        "# lines conjuncts ite store time time_diff\n"
        "8 3 0 0 0.004000 nan\n"
        "8 3 0 0 0.006000 0.002000\n"
    )
    assert paths[1].read_text().splitlines()[1] == "8 3 0 0 nan nan"


def test_diff_csv_side_by_side():
    names = ["s_1.stp", "s_2.stp"]
    stp = diff_table([record(n, t) for n, t in zip(names, [0.004, 0.006])])
    z3 = diff_table([record(n, t, solver="z3") for n, t in zip(names, [0.010, 0.015])])
    assert diff_csv([stp, z3]).splitlines() == [
        "name,time_stp,time_z3,time_diff_stp,time_diff_z3",
        "s_1.stp,0.004,0.010,,",
        "s_2.stp,0.006,0.015,0.002,0.005",
    ]
    with pytest.raises(DiffTableError):
        diff_csv([])


def test_report_csv_reads_back():
    records = [record('odd, "quoted"_1.stp', 0.25), record('odd, "quoted"_2.stp', 0.125),
               record("b_1.stp")]
    rows = list(csv.DictReader(io.StringIO(report_csv(records))))
    assert [row["name"] for row in rows] == [r.formula_name for r in records]
    assert rows[1] == {
        "name": 'odd, "quoted"_2.stp', "solver": "stp", "lines": "8", "conjuncts": "3",
        "ite": "0", "store": "0", "ratio": "", "time": "0.125000", "time_diff": "-0.125000",
        "verdict": "sat",
    }
    assert (rows[2]["time"], rows[2]["verdict"]) == ("", "sat")
