import random

import pytest
from pydantic import ValidationError

from src.core.errors import DecisionUnderrunError, FuelExhaustedError, MissingInputError, PathError
from src.ir import Branch, Store, build_ssa, ensure_ssa, interpret, parse_ir
from src.symbolic import (
    BranchCond,
    DefEquality,
    PathSpec,
    StoreStep,
    enumerate_paths,
    parse_decisions,
    path_condition,
)

from .generators import random_inputs, random_program


PAPER_CONJUNCTS = [
    "i1 = 1", "j1 = 2", "k1 = 3", "n1 = 4",
    "i2 = i1 + j1", "l1 = j1 + 1", "j2 = j1 + 2", "j2 >= n1",
]


def test_paper_fixture_concrete_path(paper_ssa):
    pc = path_condition(paper_ssa, PathSpec.concrete())
    assert [str(c) for c in pc.conjuncts] == PAPER_CONJUNCTS
    assert len(pc) == 8
    assert pc.decisions == (True,)
    assert pc.target == "ret i2 @ ret_bb"
    assert pc.symbolic_inputs == frozenset()
    assert pc.render() == " ∧ ".join(PAPER_CONJUNCTS)


def test_else_arm_negates_condition(paper_ssa):
    pc = path_condition(paper_ssa, PathSpec.directed([False, True]))
    branches = [c for c in pc.conjuncts if isinstance(c, BranchCond)]
    assert [str(b) for b in branches] == ["j2 < n1", "j2__2 >= n1"]
    assert [b.taken for b in branches] == [False, True]
    # the second iteration defines fresh instances
    names = [c.name for c in pc.conjuncts if isinstance(c, DefEquality)]
    assert names[-4:] == ["k2", "i2__2", "l1__2", "j2__2"]
    assert str(pc.conjuncts[-3]) == "l1__2 = j1 + 1"
    assert len(pc) == 13


def test_loop_paths_grow_by_a_constant(paper_ssa):
    paths = enumerate_paths(paper_ssa, max_paths=4, fuel=200)
    assert [p.decisions for p in paths] == [
        (True,), (False, True), (False, False, True), (False, False, False, True),
    ]
    lengths = [len(p) for p in paths]
    # three defs, a branch and k2 per extra iteration
    assert [b - a for a, b in zip(lengths, lengths[1:])] == [5, 5, 5]


def test_enumeration_truncated_by_fuel(paper_ssa, log_events):
    paths = enumerate_paths(paper_ssa, max_paths=10, fuel=20)
    assert len(paths) == 2
    event = next(e for e in log_events if e["event"] == "enumerated paths")
    assert event["truncated"] == 1


def test_diamond_paths(diamond_program):
    ssa = build_ssa(diamond_program)
    then_path, else_path = enumerate_paths(ssa)
    assert then_path.symbolic_inputs == {"a", "b"}
    assert str(then_path.conjuncts[3]) == "x1 > y1"
    assert str(else_path.conjuncts[3]) == "x1 <= y1"
    assert len(then_path) == len(else_path) == 7
    assert then_path.target == else_path.target == "ret w1 @ join"


def test_concrete_inputs_choose_the_path(diamond_program):
    ssa = build_ssa(diamond_program)
    pc = path_condition(ssa, PathSpec.concrete({"a": 3, "b": 1}))
    assert pc.decisions == (True,)
    assert str(pc.conjuncts[0]) == "x1 = a + 1"

    grounded = path_condition(ssa, PathSpec.concrete({"a": 0, "b": 5}), symbolic=[])
    assert grounded.decisions == (False,)
    assert grounded.symbolic_inputs == frozenset()
    assert str(grounded.conjuncts[0]) == "x1 = 0 + 1"


def test_memory_path(memory_program):
    ssa = build_ssa(memory_program)
    pc = path_condition(ssa, PathSpec.concrete({"p": 1, "v": 5}), symbolic=[])
    assert [str(c) for c in pc.conjuncts] == [
        "base1 = 100",
        "addr1 = base1 + 1",
        "mem_arr[addr1] := 5",
        "t1 = 7",
        "mem_arr[base1] := t1",
        "r1 = mem_arr[addr1]",
        "s1 = r1 + t1",
        "s1 != 0",
    ]
    assert sum(isinstance(c, StoreStep) for c in pc.conjuncts) == 2


def test_undef_reads_become_fresh_names():
    program = ensure_ssa(parse_ir(
        "func main() {\nentry:\n  undef_1 = 4\n  a = undef + undef_1\n  b = a * undef\n  ret b\n}\n"
    ))
    pc = path_condition(program, PathSpec.concrete())
    assert [str(c) for c in pc.conjuncts] == [
        "undef_1 = 4", "a = undef_2 + undef_1", "b = a * undef_3",
    ]
    assert pc.fresh_names == ("undef_2", "undef_3")


def test_prefix(paper_ssa):
    pc = path_condition(paper_ssa, PathSpec.concrete())
    head = pc.prefix(3)
    assert [str(c) for c in head.conjuncts] == PAPER_CONJUNCTS[:3]
    assert head.target == "prefix of 3 conjuncts"
    assert pc.prefix(8) == pc


def test_path_spec_needs_a_mode():
    with pytest.raises(ValidationError):
        PathSpec()
    with pytest.raises(ValidationError):
        PathSpec.concrete(fuel=0)


def test_missing_concrete_input(diamond_program):
    with pytest.raises(MissingInputError):
        path_condition(build_ssa(diamond_program), PathSpec.concrete({"a": 1}))


def test_decision_underrun(paper_ssa):
    with pytest.raises(DecisionUnderrunError):
        path_condition(paper_ssa, PathSpec.directed([]))


def test_fuel_exhausted_on_path(paper_ssa):
    with pytest.raises(FuelExhaustedError):
        path_condition(paper_ssa, PathSpec.directed([False] * 50, fuel=30))


def test_parse_decisions():
    assert parse_decisions("T,f, 1,else,then") == (True, False, True, False, True)
    assert parse_decisions("") == ()
    with pytest.raises(PathError):
        parse_decisions("T,maybe")


@pytest.mark.property
def test_conjuncts_match_interpreter_trace(machine8):
    rng = random.Random(5)
    for _ in range(100):
        ssa = build_ssa(random_program(rng))
        inputs = random_inputs(rng)
        pc = path_condition(ssa, PathSpec.concrete(inputs), machine=machine8)
        trace = interpret(ssa.program, machine8, inputs).trace
        expected = sum(1 for e in trace
                       if e.instruction.dest is not None or isinstance(e.instruction, (Branch, Store)))
        assert len(pc) == expected
        assert pc.decisions == tuple(e.taken for e in trace if e.taken is not None)
