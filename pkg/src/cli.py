"""
Command-line surface of the toolkit.

Exit codes: 0 on success, 1 on usage errors, 2 when an input, a
configuration value or a solver run fails.
"""

import argparse
import sys
import tempfile
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import structlog
from pydantic import ValidationError

from .analysis import CvaConfig, PassPipeline, cva, dce, mark_fixpoint, run_pipeline
from .bench import SolverSpec, configured_solvers, diff_table, report_csv, run_bench, write_dat
from .core.config import BranchArm, CvaModeName, LogLevel, OutputFormat, fixture_path, settings
from .core.errors import DiffTableError, PfqError
from .core.log import setup_logging
from .formula import (
    brute_solve,
    convert,
    emit,
    lower,
    metrics,
    parse_formula,
    split_prefixes,
    split_steps,
)
from .ir import Program, SsaProgram, ensure_ssa, parse_ir, print_ir, validate_ssa
from .ir.machine import MachineConfig, default_machine
from .symbolic import (
    PathCondition,
    PathSpec,
    dump_pc,
    enumerate_paths,
    load_pc,
    parse_decisions,
    path_condition,
    shrinkage,
)


logger = structlog.get_logger(__name__)

PAPER_FIXTURE = "paper_example_ssa.mir"
PAPER_SEEDS = ("i",)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse reports usage problems with exit status 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


# Helpers

def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise PfqError(f"cannot read file: {exc.strerror}", source=path) from exc


def _program(path: str) -> Program:
    return parse_ir(_read(path), source=path)


def _names(text: Optional[str]) -> List[str]:
    return [n.strip() for n in (text or "").split(",") if n.strip()]


def _inputs(text: Optional[str]) -> Dict[str, int]:
    values = {}
    for item in _names(text):
        name, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"input {item!r} must be name=value")
        try:
            values[name.strip()] = int(value, 0)
        except ValueError:
            raise UsageError(f"input {item!r} is not an integer") from None
    return values


def _machine(args) -> MachineConfig:
    machine = default_machine()
    width = getattr(args, "bit_width", None)
    if not width:
        return machine
    return MachineConfig(bit_width=width, undef_policy=machine.undef_policy)


def _spec(args) -> PathSpec:
    fuel = getattr(args, "fuel", None)
    if getattr(args, "decisions", None) is not None:
        return PathSpec.directed(parse_decisions(args.decisions), fuel)
    return PathSpec.concrete(_inputs(getattr(args, "inputs", None)), fuel)


def _optimised(ssa: SsaProgram, args) -> SsaProgram:
    seeds = _names(getattr(args, "vars", None))
    if seeds:
        ssa = cva(ssa, CvaConfig(seed_vars=seeds, mode=args.mode or settings.analysis.cva_mode))
    if getattr(args, "optimise", True):
        ssa = run_pipeline(ssa, _pipeline(args), _machine(args))
    return ssa


def _pipeline(args) -> PassPipeline:
    data = {}
    if getattr(args, "passes", None):
        data["passes"] = args.passes
    if getattr(args, "max_rounds", None):
        data["max_rounds"] = args.max_rounds
    if getattr(args, "undef_branch", None):
        data["undef_branch"] = BranchArm(args.undef_branch)
    return PassPipeline(**data)


def _path_condition(path: str, args) -> PathCondition:
    """A `.pc` dump as written, or one path of a `.mir` program."""
    if path.endswith(".pc"):
        return load_pc(_read(path), source=path)
    ssa = ensure_ssa(_program(path))
    if _names(getattr(args, "vars", None)) or getattr(args, "passes", None):
        ssa = _optimised(ssa, args)
    symbolic = _names(getattr(args, "symbolic", None)) or None
    return path_condition(ssa, _spec(args), symbolic, _machine(args))


def _format(args) -> OutputFormat:
    return OutputFormat(args.format)


def _output(text: str, target: Optional[str]) -> None:
    if target:
        Path(target).write_text(text)
    else:
        print(text, end="")


# Commands

def cmd_parse(args) -> int:
    print(print_ir(_program(args.file)), end="")
    return 0


def cmd_ssa(args) -> int:
    program = _program(args.file)
    if args.check:
        violations = validate_ssa(program)
        for v in violations:
            print(v)
        return 2 if violations else 0
    print(print_ir(ensure_ssa(program).program), end="")
    return 0


def cmd_cva(args) -> int:
    ssa = ensure_ssa(_program(args.file))
    config = CvaConfig(seed_vars=_names(args.vars), mode=args.mode or settings.analysis.cva_mode)
    if args.marks:
        marks = mark_fixpoint(ssa, config)
        for iid, instr in ssa.main.instructions():
            print(f"{marks[iid].name.lower():9} {instr}")
        return 0
    _output(print_ir(cva(ssa, config).program), args.output)
    return 0


def cmd_opt(args) -> int:
    ssa = _optimised(ensure_ssa(_program(args.file)), args)
    _output(print_ir(ssa.program), args.output)
    return 0


def cmd_pathcond(args) -> int:
    if args.enumerate:
        ssa = ensure_ssa(_program(args.file))
        if _names(args.vars) or args.passes:
            ssa = _optimised(ssa, args)
        paths = enumerate_paths(ssa, args.max_paths, args.fuel, _names(args.symbolic) or None,
                                _machine(args))
        out_dir = Path(args.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        stem = Path(args.file).stem
        for n, pc in enumerate(paths, 1):
            target = out_dir / f"{stem}_{n}.pc"
            target.write_text(dump_pc(pc))
            print(f"{target} conjuncts={len(pc)}")
        return 0
    pc = _path_condition(args.file, args)
    text = dump_pc(pc)
    _output(text, args.output)
    return 0


def cmd_emit(args) -> int:
    text = emit(lower(_path_condition(args.file, args), _machine(args)), _format(args))
    _output(text, args.output)
    return 0


def cmd_convert(args) -> int:
    text = convert(_read(args.file), OutputFormat(args.to), source=args.file)
    _output(text, args.output)
    return 0


def cmd_split(args) -> int:
    if (args.k is None) == (args.step is None):
        raise UsageError("give exactly one of -k or --step")
    pc = _path_condition(args.file, args)
    machine = _machine(args)
    series = split_prefixes(pc, args.k, machine) if args.k is not None else split_steps(pc, args.step, machine)
    fmt = _format(args)
    out_dir = Path(args.out_dir or ".")
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.file).stem
    suffix = "stp" if fmt == OutputFormat.STP else "smt2"
    for n, (formula, size) in enumerate(zip(series.sections, series.sizes), 1):
        target = out_dir / f"{stem}_{n}.{suffix}"
        target.write_text(emit(formula, fmt))
        print(f"{target} conjuncts={size}")
    return 0


def cmd_metrics(args) -> int:
    formula = parse_formula(_read(args.file), args.file)
    m = metrics(formula)
    print(f"lines(stp) = {m.lines_stp}")
    print(f"lines(smt2) = {m.lines_smt2}")
    print(f"conciseness = {m.conciseness:.2f}")
    print(f"ite = {m.ite_count}")
    print(f"store = {m.store_count}")
    print(f"ratio = {m.format_ratio() or '-'}")
    return 0


def cmd_solve(args) -> int:
    formula = parse_formula(_read(args.file), args.file)
    print(brute_solve(formula, args.width, args.cells).render())
    return 0


def _solvers(args) -> List[SolverSpec]:
    try:
        solvers = [SolverSpec.parse(text) for text in args.solver] or configured_solvers()
    except ValidationError as exc:
        raise UsageError(str(exc.errors()[0]["msg"])) from None
    if not solvers:
        raise UsageError("no solvers: pass --solver name=template or set PFQ_SOLVER_<NAME>")
    return solvers


def cmd_bench(args) -> int:
    records = run_bench(args.files, _solvers(args), args.reps, args.memory or None)
    text = report_csv(records)
    if args.csv:
        Path(args.csv).write_text(text)
    else:
        print(text, end="")
    if args.dat_dir:
        write_dat(records, Path(args.dat_dir))
    if args.diff:
        for solver in dict.fromkeys(r.solver for r in records):
            try:
                print(diff_table([r for r in records if r.solver == solver]).to_csv(), end="")
            except DiffTableError as exc:
                logger.warning("diff table skipped", solver=solver, reason=exc.message)
    return 0


def cmd_shrink(args) -> int:
    seeds = _names(args.vars)
    if not seeds:
        raise UsageError("--vars is required")
    report = shrinkage(_program(args.file), seeds, _inputs(args.inputs),
                       CvaModeName(args.mode) if args.mode else None, _pipeline(args), _machine(args))
    print(report.render())
    solvers = [SolverSpec.parse(text) for text in args.solver]
    if solvers:
        with tempfile.TemporaryDirectory() as tmp:
            files = []
            for label, pc in (("before", report.before), ("after", report.after)):
                path = Path(tmp) / f"{label}.smt2"
                path.write_text(emit(lower(pc, _machine(args)), OutputFormat.SMTLIB2))
                files.append(path)
            for record in run_bench(files, solvers):
                print(f"time({Path(record.formula_name).stem}, {record.solver}) = "
                      f"{record.reported_time if record.reported_time is not None else '-'}")
    return 0


def cmd_demo_paper(args) -> int:
    machine = _machine(args)
    path = args.file or str(fixture_path(PAPER_FIXTURE))
    ssa = ensure_ssa(_program(path))
    spec = PathSpec.concrete({})

    original = path_condition(ssa, spec, machine=machine)
    after_dce = path_condition(dce(ssa), spec, machine=machine)
    final = run_pipeline(cva(ssa, CvaConfig(seed_vars=PAPER_SEEDS, mode=CvaModeName.CONSERVATIVE)),
                         machine=machine)
    query = path_condition(final, spec, machine=machine)

    print(f"conjuncts(original) = {len(original)}")
    print(f"conjuncts(after-dce) = {len(after_dce)}")
    print(f"conjuncts(after-cva+opt) = {len(query)}")
    print(f"query: {query.render()}")
    print()
    print(print_ir(final.program), end="")
    print()
    print(emit(lower(query, machine), _format(args)), end="")
    return 0


def cmd_config(args) -> int:
    config = settings
    print(f"app: {config.app_name} {config.app_version}")
    print(f"environment: {config.environment.value}")
    print(f"log level: {config.log_level.value}")
    print(f"fixtures: {config.fixtures_dir}")
    print(f"machine: bit_width={config.machine.bit_width} undef_value={config.machine.undef_value} "
          f"undef_seed={config.machine.undef_seed}")
    print(f"analysis: cva_mode={config.analysis.cva_mode.value} "
          f"passes={','.join(config.analysis.passes)} max_rounds={config.analysis.max_rounds} "
          f"undef_branch={config.analysis.undef_branch.value}")
    print(f"path: fuel={config.path.fuel} max_paths={config.path.max_paths}")
    print(f"oracle: max_width={config.oracle.max_width} max_array_cells={config.oracle.max_array_cells} "
          f"max_state_bits={config.oracle.max_state_bits}")
    print(f"bench: reps={config.bench.reps} timeout={config.bench.timeout} "
          f"measure_memory={config.bench.measure_memory}")
    solvers = [s.name for s in configured_solvers()]
    print(f"solvers: {', '.join(solvers) or '-'}")
    return 0


SAMPLE_ENV = """# Path Feasibility Query Toolkit Configuration

# Application Settings
PFQ_ENVIRONMENT="development"

# Logging
PFQ_LOG_LEVEL="WARNING"
PFQ_LOG_JSON=false
# PFQ_LOG_FILE="pfq.log"

# Machine semantics
PFQ_MACHINE_BIT_WIDTH=32
PFQ_MACHINE_UNDEF_VALUE=0
# PFQ_MACHINE_UNDEF_SEED=7

# Change value analysis and pipeline
PFQ_ANALYSIS_CVA_MODE="conservative"
PFQ_ANALYSIS_PASSES=["constprop", "sccp-undef", "dce", "dse"]
PFQ_ANALYSIS_MAX_ROUNDS=10
PFQ_ANALYSIS_UNDEF_BRANCH="then"

# Path exploration
PFQ_PATH_FUEL=10000
PFQ_PATH_MAX_PATHS=64

# Brute-force oracle
PFQ_ORACLE_MAX_WIDTH=6
PFQ_ORACLE_MAX_ARRAY_CELLS=8
PFQ_ORACLE_MAX_STATE_BITS=24

# Benchmarking
PFQ_BENCH_REPS=5
PFQ_BENCH_TIMEOUT=60
PFQ_BENCH_MEASURE_MEMORY=false
# PFQ_SOLVER_STP="stp {file}"
# PFQ_SOLVER_Z3="z3 -smt2 {file}"
"""


def cmd_create_env(args) -> int:
    target = Path(args.output)
    if target.exists() and not args.force:
        raise UsageError(f"{target} exists; pass --force to overwrite")
    target.write_text(SAMPLE_ENV)
    print(f"Created {target} with default configuration")
    return 0


# Parser

def _path_options(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--inputs", help="concrete inputs, e.g. a=1,b=-2")
    group.add_argument("--path-decisions", "--decisions", dest="decisions",
                       help="branch decisions, e.g. T,F,T")
    parser.add_argument("--symbolic", help="parameters kept symbolic (default: all)")
    parser.add_argument("--fuel", type=int, default=None, help="step budget of the walk")


def _undef_branch_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--undef-branch", choices=[b.value for b in BranchArm], default=None,
                        help="arm taken by branches on undef "
                             f"(default: {settings.analysis.undef_branch.value})")


def _opt_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--vars", help="CVA seed variables, comma separated")
    parser.add_argument("--mode", choices=[m.value for m in CvaModeName], default=None)
    parser.add_argument("--passes", help="comma separated pass list")
    parser.add_argument("--max-rounds", type=int, default=None)
    _undef_branch_option(parser)


def _format_option(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=OutputFormat.SMTLIB2.value)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="pfq",
        description="Path feasibility query toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  pfq demo-paper                         # reproduce the loop example
  pfq cva prog.mir --vars i              # star everything i does not depend on
  pfq emit prog.mir --inputs a=1 --format stp
  pfq split path.pc -k 4 --out-dir series/
  pfq solve --width 4 query.smt2
  pfq bench series/*.smt2 --solver z3='z3 {file}'
        """,
    )
    parser.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
                        default=None, help=f"log level (default: {settings.log_level.value})")
    parser.add_argument("--log-json", action="store_true", help="render logs as JSON")
    parser.add_argument("--bit-width", type=int, default=None,
                        help=f"word width (default: {settings.machine.bit_width})")
    sub = parser.add_subparsers(dest="command", metavar="command", parser_class=_Parser)

    p = sub.add_parser("parse", help="parse and print a .mir program")
    p.add_argument("file")
    p.set_defaults(handler=cmd_parse)

    p = sub.add_parser("ssa", help="build (or --check) SSA form")
    p.add_argument("file")
    p.add_argument("--check", action="store_true", help="list SSA violations instead")
    p.set_defaults(handler=cmd_ssa)

    p = sub.add_parser("cva", help="change value analysis")
    p.add_argument("file")
    p.add_argument("--vars", required=True, help="seed variables, comma separated")
    p.add_argument("--mode", choices=[m.value for m in CvaModeName], default=None)
    p.add_argument("--marks", action="store_true", help="print marks instead of the rewritten program")
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_cva)

    p = sub.add_parser("opt", help="run CVA (with --vars) and the pass pipeline")
    p.add_argument("file")
    _opt_options(p)
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_opt)

    p = sub.add_parser("pathcond", help="path condition of one path as a .pc dump")
    p.add_argument("file")
    _path_options(p)
    _opt_options(p)
    p.add_argument("-o", "--output")
    p.add_argument("--enumerate", action="store_true", help="dump every path, then-arm first")
    p.add_argument("--max-paths", type=int, default=None)
    p.add_argument("--out-dir")
    p.set_defaults(handler=cmd_pathcond)

    p = sub.add_parser("emit", help="emit the query of a path (.mir) or a .pc dump")
    p.add_argument("file")
    _path_options(p)
    _opt_options(p)
    _format_option(p)
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_emit)

    p = sub.add_parser("convert", help="convert between STP and SMT-LIB2")
    p.add_argument("file")
    p.add_argument("--to", choices=[f.value for f in OutputFormat], default=OutputFormat.SMTLIB2.value)
    p.add_argument("-o", "--output")
    p.set_defaults(handler=cmd_convert)

    p = sub.add_parser("split", help="write a prefix series of a path condition")
    p.add_argument("file")
    p.add_argument("-k", type=int, default=None, help="number of sections")
    p.add_argument("--step", type=int, default=None, help="conjuncts per step")
    _path_options(p)
    _opt_options(p)
    _format_option(p)
    p.add_argument("--out-dir")
    p.set_defaults(handler=cmd_split)

    p = sub.add_parser("metrics", help="line, IF-ENDIF and Array Write counts of a formula file")
    p.add_argument("file")
    p.set_defaults(handler=cmd_metrics)

    p = sub.add_parser("solve", help="brute-force verdict and least model")
    p.add_argument("file")
    p.add_argument("--width", type=int, default=None, help="re-width the formula first")
    p.add_argument("--cells", type=int, default=None, help="memory cells to enumerate")
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser("bench", help="time external solvers on formula files")
    p.add_argument("files", nargs="+")
    p.add_argument("--solver", action="append", default=[], help="name=template with {file}")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--csv", help="write the CSV report here instead of stdout")
    p.add_argument("--dat-dir", help="write one .dat plot file per series and solver")
    p.add_argument("--diff", action="store_true", help="also print per-solver time-diff tables")
    p.add_argument("--memory", action="store_true", help="sample peak memory in one extra run")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("shrink", help="conjuncts before and after CVA + pipeline")
    p.add_argument("file")
    p.add_argument("--vars", required=True)
    p.add_argument("--inputs")
    p.add_argument("--mode", choices=[m.value for m in CvaModeName], default=None)
    p.add_argument("--passes")
    p.add_argument("--max-rounds", type=int, default=None)
    _undef_branch_option(p)
    p.add_argument("--solver", action="append", default=[], help="name=template with {file}")
    p.set_defaults(handler=cmd_shrink)

    p = sub.add_parser("demo-paper", help="run the loop example end to end")
    p.add_argument("file", nargs="?", help=f"SSA fixture (default: bundled {PAPER_FIXTURE})")
    _format_option(p)
    p.set_defaults(handler=cmd_demo_paper)

    p = sub.add_parser("config", help="print the effective configuration")
    p.set_defaults(handler=cmd_config)

    p = sub.add_parser("create-env", help="write a sample .env file")
    p.add_argument("-o", "--output", default=".env")
    p.add_argument("--force", action="store_true")
    p.set_defaults(handler=cmd_create_env)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 1

    overrides = {}
    if args.log_level:
        overrides["log_level"] = LogLevel(args.log_level)
    if args.log_json:
        overrides["log_json"] = True
    setup_logging(settings.model_copy(update=overrides))

    try:
        return args.handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"pfq: error: {exc}", file=sys.stderr)
        return 1
    except PfqError as exc:
        where = exc.location() if exc.source or exc.line is not None else "pfq"
        print(f"{where}: {exc.message}", file=sys.stderr)
        logger.debug("command failed", command=args.command, error=exc.message)
        return 2
    except ValidationError as exc:
        print(f"pfq: invalid configuration: {exc.errors()[0]['msg']}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
