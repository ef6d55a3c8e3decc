"""
External solver benchmarking.

Every (file, solver) pair runs `reps` times, one invocation at a time, on
a monotonic wall clock. The reported time is the median of the runs.
"""

import os
import re
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import psutil
import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.config import settings
from ..core.errors import ConfigError, SolverNotFoundError
from ..formula.metrics import count_lines, metrics
from ..formula.oracle import Verdict
from ..formula.smtlib2 import parse_formula


logger = structlog.get_logger(__name__)

PLACEHOLDER = "{file}"
ENV_PREFIX = "PFQ_SOLVER_"

_VERDICT = re.compile(r"^\s*(unsat|sat|unknown|Invalid\.|Valid\.)\s*$", re.MULTILINE)
_VERDICT_TOKENS = {
    "sat": Verdict.SAT,
    "unsat": Verdict.UNSAT,
    "unknown": Verdict.UNKNOWN,
    # replies of CVC-style solvers to QUERY(FALSE)
    "Invalid.": Verdict.SAT,
    "Valid.": Verdict.UNSAT,
}


class SolverSpec(BaseModel):
    """A solver command line with one `{file}` placeholder."""

    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    command_template: str
    timeout: float = Field(default_factory=lambda: settings.bench.timeout, gt=0)

    @field_validator("command_template")
    @classmethod
    def validate_template(cls, v: str) -> str:
        if v.count(PLACEHOLDER) != 1:
            raise ValueError(f"command template must contain exactly one {PLACEHOLDER}")
        return v

    def command(self, path: Path) -> List[str]:
        return [part.replace(PLACEHOLDER, str(path)) for part in shlex.split(self.command_template)]

    @classmethod
    def from_env(cls, name: str) -> "SolverSpec":
        """Template from `PFQ_SOLVER_<NAME>`."""
        key = ENV_PREFIX + re.sub(r"[^A-Za-z0-9]", "_", name).upper()
        template = os.environ.get(key)
        if not template:
            raise ConfigError(f"no command template for solver {name!r}; set {key}")
        return cls(name=name, command_template=template)

    @classmethod
    def parse(cls, text: str) -> "SolverSpec":
        """`name=template`, or a bare name looked up in the environment."""
        name, sep, template = text.partition("=")
        if not sep:
            return cls.from_env(name.strip())
        return cls(name=name.strip(), command_template=template.strip())


def configured_solvers() -> List[SolverSpec]:
    """Every solver named by a `PFQ_SOLVER_*` variable, sorted by name."""
    names = sorted(k[len(ENV_PREFIX):].lower() for k, v in os.environ.items()
                   if k.upper().startswith(ENV_PREFIX) and v)
    return [SolverSpec.from_env(name) for name in names]


def parse_verdict(stdout: str) -> Verdict:
    match = _VERDICT.search(stdout)
    return _VERDICT_TOKENS[match.group(1)] if match else Verdict.UNKNOWN


@dataclass(frozen=True)
class FormulaInfo:
    name: str
    lines: int
    conjuncts: int
    ite_count: int
    store_count: int
    ratio: Optional[float]


def describe(path: Path) -> FormulaInfo:
    text = path.read_text()
    formula = parse_formula(text, str(path))
    m = metrics(formula)
    return FormulaInfo(path.name, count_lines(text), len(formula.assertions),
                       m.ite_count, m.store_count, m.ratio)


@dataclass(frozen=True)
class BenchRecord:
    formula_name: str
    solver: str
    lines: int
    conjuncts: int
    ite_count: int
    store_count: int
    ratio: Optional[float]
    times: Tuple[float, ...] = ()
    verdict: Verdict = Verdict.UNKNOWN
    memory_kb: Optional[int] = None
    error: Optional[str] = None

    @property
    def reps(self) -> int:
        return len(self.times)

    @property
    def reported_time(self) -> Optional[float]:
        if not self.times:
            return None
        return float(np.median(np.array(self.times)))

    @property
    def series(self) -> str:
        """Program series of the formula name: `l1list_tr1_3.stp` belongs to `l1list_tr1`."""
        stem = Path(self.formula_name).stem
        return re.sub(r"_\d+$", "", stem)


@dataclass
class _Run:
    elapsed: float
    verdict: Verdict
    returncode: Optional[int] = None
    stderr: str = field(default="", repr=False)


def run_once(spec: SolverSpec, path: Path) -> _Run:
    args = spec.command(path)
    start = time.perf_counter()
    try:
        completed = subprocess.run(args, capture_output=True, text=True, timeout=spec.timeout)
    except subprocess.TimeoutExpired:
        return _Run(time.perf_counter() - start, Verdict.TIMEOUT)
    except (FileNotFoundError, PermissionError) as exc:
        raise SolverNotFoundError(f"cannot start solver {spec.name!r}: {exc}") from exc
    elapsed = time.perf_counter() - start
    return _Run(elapsed, parse_verdict(completed.stdout), completed.returncode, completed.stderr)


def peak_memory_kb(spec: SolverSpec, path: Path, interval: float = 0.005) -> Optional[int]:
    """Peak resident set size of one untimed run; None where the platform denies access."""
    try:
        process = psutil.Popen(spec.command(path), stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    except (FileNotFoundError, PermissionError):
        return None
    peak = 0
    deadline = time.monotonic() + spec.timeout
    try:
        while process.poll() is None:
            try:
                peak = max(peak, process.memory_info().rss)
            except (psutil.AccessDenied, psutil.NoSuchProcess, psutil.ZombieProcess):
                pass
            if time.monotonic() > deadline:
                process.kill()
                break
            time.sleep(interval)
    finally:
        if process.poll() is None:
            process.kill()
    return peak // 1024 if peak else None


def bench_pair(path: Path, spec: SolverSpec, info: FormulaInfo, reps: int,
               measure_memory: bool = False) -> BenchRecord:
    times: List[float] = []
    verdict = Verdict.UNKNOWN
    try:
        for rep in range(reps):
            run = run_once(spec, path)
            times.append(run.elapsed)
            verdict = run.verdict
            logger.debug("solver invocation", solver=spec.name, file=info.name, rep=rep + 1,
                         elapsed=round(run.elapsed, 6), verdict=verdict.value,
                         returncode=run.returncode)
            if verdict is Verdict.TIMEOUT:
                break
    except SolverNotFoundError as exc:
        logger.error("solver not found", solver=spec.name, error=str(exc))
        return BenchRecord(info.name, spec.name, info.lines, info.conjuncts, info.ite_count,
                           info.store_count, info.ratio, (), Verdict.ERROR, error=str(exc))
    memory = peak_memory_kb(spec, path) if measure_memory else None
    return BenchRecord(info.name, spec.name, info.lines, info.conjuncts, info.ite_count,
                       info.store_count, info.ratio, tuple(times), verdict, memory)


def run_bench(files: Iterable[Path], solvers: Sequence[SolverSpec], reps: Optional[int] = None,
              measure_memory: Optional[bool] = None) -> List[BenchRecord]:
    """Time every (file, solver) pair sequentially; failures become error records."""
    reps = reps if reps is not None else settings.bench.reps
    if reps < 1:
        raise ConfigError(f"reps must be at least 1, got {reps}")
    measure_memory = settings.bench.measure_memory if measure_memory is None else measure_memory
    records: List[BenchRecord] = []
    for path in map(Path, files):
        info = describe(path)
        for spec in solvers:
            record = bench_pair(path, spec, info, reps, measure_memory)
            logger.info("bench record", file=info.name, solver=spec.name,
                        reps=record.reps, time=record.reported_time, verdict=record.verdict.value)
            records.append(record)
    return records
