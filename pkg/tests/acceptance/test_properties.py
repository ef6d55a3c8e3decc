"""Conciseness, prefix monotonicity and shrinkage over fixtures and generated inputs."""

import random

import pytest

from src.core.config import fixture_path
from src.formula import (
    Verdict,
    brute_solve,
    count_lines,
    emit_smtlib2,
    emit_stp,
    lower,
    parse_formula,
    split_prefixes,
)
from src.ir import MachineConfig, UndefPolicy, build_ssa, ensure_ssa, parse_ir
from src.symbolic import PathSpec, enumerate_paths, path_condition, shrinkage

from ..generators import random_formula, random_program


pytestmark = [pytest.mark.acceptance, pytest.mark.property]

MACHINE4 = MachineConfig(bit_width=4, undef_policy=UndefPolicy.fixed(0))


def fixture_formulas():
    formulas = [parse_formula(fixture_path(name).read_text(), name)
                for name in ("paper_query.stp", "paper_query.smt2")]
    programs = {
        "paper_example_ssa.mir": {},
        "diamond.mir": {"a": 3, "b": 1},
        "memory.mir": {"p": 1, "v": 5},
    }
    for name, inputs in programs.items():
        ssa = ensure_ssa(parse_ir(fixture_path(name).read_text(), source=name))
        formulas.append(lower(path_condition(ssa, PathSpec.concrete(inputs), machine=MACHINE4), MACHINE4))
    return formulas


def test_smtlib2_is_never_longer_than_stp(record_property):
    rng = random.Random(41)
    formulas = fixture_formulas() + [random_formula(rng) for _ in range(200)]
    stp_lines = smt2_lines = 0
    for formula in formulas:
        stp, smt2 = count_lines(emit_stp(formula)), count_lines(emit_smtlib2(formula))
        assert smt2 <= stp
        stp_lines += stp
        smt2_lines += smt2
    record_property("conciseness", round(stp_lines / smt2_lines, 3))


def generated_path_conditions(rng, count):
    found = []
    while len(found) < count:
        ssa = build_ssa(random_program(rng, memory=False))
        for pc in enumerate_paths(ssa, max_paths=3, fuel=60, machine=MACHINE4):
            if len(pc) >= 2:
                found.append(pc)
    return found[:count]


def test_prefix_series_is_monotone():
    rng = random.Random(43)
    for pc in generated_path_conditions(rng, 100):
        k = rng.randint(2, min(6, len(pc)))
        series = split_prefixes(pc, k, MACHINE4)
        verdicts = [brute_solve(section, width_override=3).verdict for section in series.sections]
        for i, verdict in enumerate(verdicts):
            if verdict is Verdict.UNSAT:
                assert set(verdicts[i:]) == {Verdict.UNSAT}, (pc.render(), series.sizes)
        if verdicts[-1] is Verdict.SAT:
            assert set(verdicts) == {Verdict.SAT}


SHRINK_CASES = [
    ("paper_example_ssa.mir", {}, [{"i"}, {"j"}, {"i", "j"}]),
    ("paper_example.mir", {}, [{"i"}, {"j"}, {"i", "j"}]),
    ("diamond.mir", {"a": 3, "b": 1}, [{"a"}, {"b"}, {"a", "b"}]),
    ("memory.mir", {"p": 1, "v": 5}, [{"p"}, {"v"}, {"p", "v"}]),
]


@pytest.mark.parametrize("name, inputs, seed_choices", SHRINK_CASES)
def test_shrinkage_never_grows(name, inputs, seed_choices, record_property):
    program = parse_ir(fixture_path(name).read_text(), source=name)
    for seeds in seed_choices:
        report = shrinkage(program, seeds, inputs, machine=MACHINE4)
        assert len(report.after) <= len(report.before), report.render()
        record_property(f"reduction[{','.join(sorted(seeds))}]", round(report.reduction, 1))


def test_loop_example_shrinks_strictly():
    program = parse_ir(fixture_path("paper_example_ssa.mir").read_text())
    report = shrinkage(program, {"i"})
    assert (len(report.before), len(report.after)) == (8, 3)
    assert report.reduction == pytest.approx(62.5)
