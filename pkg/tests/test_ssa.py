import random

import pytest

from src.core.errors import SsaConstructionError
from src.ir import Const, Phi, SsaProgram, Var, build_ssa, ensure_ssa, interpret, parse_ir, validate_ssa
from src.ir.ssa import DOMINANCE, MULTIPLE_DEFINITIONS, UNDEFINED_NAME, UNREACHABLE_BLOCK, source_name

from .generators import random_inputs, random_program


UNDOMINATED = """
func main(p) {
entry:
  br p, a, b
a:
  x = 1
  jmp c
b:
  jmp c
c:
  ret x
}
"""


def test_fixture_is_valid_ssa(paper_ssa):
    assert validate_ssa(paper_ssa.program) == []
    assert paper_ssa.version_map["i"] == ("i1", "i2")
    assert paper_ssa.version_map["n"] == ("n1",)
    assert paper_ssa.source_variables() == ("i", "j", "k", "n", "l")
    assert paper_ssa.versions_of(["j", "k"]) == {"j1", "j2", "k1", "k2"}


def test_pre_ssa_program_has_violations(paper_program):
    kinds = {(v.kind, v.name) for v in validate_ssa(paper_program)}
    assert (MULTIPLE_DEFINITIONS, "i") in kinds
    assert (MULTIPLE_DEFINITIONS, "j") in kinds
    assert (MULTIPLE_DEFINITIONS, "k") in kinds


def test_dominance_violation():
    violations = validate_ssa(parse_ir(UNDOMINATED))
    assert [(v.kind, v.name, v.location) for v in violations] == [(DOMINANCE, "x", ("c", 0))]
    assert str(violations[0]).startswith("c[0]: dominance:")


def test_undefined_name():
    program = parse_ir("func main() {\nentry:\n  ret z\n}\n")
    assert [v.kind for v in validate_ssa(program)] == [UNDEFINED_NAME]


def test_build_ssa_places_loop_phis(paper_program):
    ssa = build_ssa(paper_program)
    assert validate_ssa(ssa.program) == []
    header = ssa.main.block("L")
    phis = header.phis()
    assert [phi.dest for phi in phis] == ["i2", "j2", "k2"]
    assert phis[0] == Phi("i2", (("entry", Var("i1")), ("else_bb", Var("i3"))))
    assert ssa.version_map["i"] == ("i1", "i2", "i3")
    assert ssa.version_map["l"] == ("l1",)
    assert ssa.main.block("ret_bb").terminator.value == Var("i3")


def test_build_ssa_preserves_semantics(paper_program):
    assert interpret(build_ssa(paper_program).program).return_value == 3


def test_build_ssa_rejects_use_before_definition():
    with pytest.raises(SsaConstructionError):
        build_ssa(parse_ir(UNDOMINATED))


def test_build_ssa_rejects_phis():
    with pytest.raises(SsaConstructionError):
        build_ssa(_with_phi())


def _with_phi():
    return parse_ir(
        "func main(p) {\nentry:\n  br p, a, b\na:\n  jmp c\nb:\n  jmp c\n"
        "c:\n  x = phi [a: 1], [b: 2]\n  ret x\n}\n"
    )


def test_ensure_ssa_wraps_valid_input(paper_ssa):
    wrapped = ensure_ssa(paper_ssa.program)
    assert wrapped.program == paper_ssa.program
    assert wrapped == SsaProgram.from_program(paper_ssa.program)


def test_ensure_ssa_builds_for_invalid_input(paper_program):
    ssa = ensure_ssa(paper_program)
    assert validate_ssa(ssa.program) == []
    assert ssa.program != paper_program


def test_with_program_drops_vanished_names(paper_ssa, paper_final):
    narrowed = paper_ssa.with_program(paper_final)
    assert narrowed.version_map == {"i": ("i1", "i2"), "j": ("j1",)}


@pytest.mark.parametrize("name, source", [
    ("i12", "i"), ("x__3", "x"), ("mem2", "mem"), ("k", "k"), ("a1__2", "a"),
])
def test_source_name(name, source):
    assert source_name(name) == source


@pytest.mark.property
def test_generated_programs_keep_their_meaning(machine8):
    rng = random.Random(2024)
    for _ in range(200):
        program = random_program(rng)
        ssa = build_ssa(program)
        assert validate_ssa(ssa.program) == [], ssa.program
        for _ in range(10):
            inputs = random_inputs(rng)
            before = interpret(program, machine8, inputs)
            after = interpret(ssa.program, machine8, inputs)
            assert after.return_value == before.return_value
            assert after.prints == before.prints
            assert after.decisions() == before.decisions()


DEAD_TAIL = "func main(a) {\nentry:\n  ret a\ndead:\n  ret 0\n}\n"


def test_unreachable_block_is_a_violation():
    violations = validate_ssa(parse_ir(DEAD_TAIL))
    assert [(v.kind, v.name, v.location) for v in violations] == [(UNREACHABLE_BLOCK, "dead", ("dead", 0))]
    assert str(violations[0]) == "dead[0]: unreachable block: block dead is unreachable from entry"


def test_ensure_ssa_drops_unreachable_blocks():
    text = (
        "func main(p) {\n"
        "entry:\n"
        "  jmp c\n"
        "d:\n"
        "  jmp c\n"
        "c:\n"
        "  x1 = phi [entry: 1], [d: 2]\n"
        "  ret x1\n"
        "}\n"
    )
    ssa = ensure_ssa(parse_ir(text))
    assert [b.label for b in ssa.main.blocks] == ["entry", "c"]
    assert ssa.main.block("c").instructions[0] == Phi("x1", (("entry", Const(1)),))
    assert validate_ssa(ssa.program) == []
