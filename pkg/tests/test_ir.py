import random

import pytest

from src.core.config import fixture_path
from src.core.errors import (
    FuelExhaustedError,
    IRSyntaxError,
    IRValidationError,
    MissingInputError,
)
from src.ir import (
    UNDEF,
    BinaryOp,
    BinOp,
    Branch,
    Comparison,
    Const,
    ConstAssign,
    ControlFlowGraph,
    Jump,
    MachineConfig,
    Relation,
    Return,
    UndefPolicy,
    Var,
    interpret,
    parse_ir,
    print_ir,
)
from src.ir.machine import apply_relation, to_signed, wrap

from .generators import random_program


def test_parse_paper_example(paper_program):
    fn = paper_program.main
    assert fn.params == ()
    assert [b.label for b in fn.blocks] == ["entry", "L", "ret_bb", "else_bb"]
    assert paper_program.instruction_count() == 13
    assert fn.block("L").instructions[0] == BinOp("i", BinaryOp.ADD, Var("i"), Var("j"))
    assert fn.block("L").terminator == Branch(
        Comparison(Relation.GE, Var("j"), Var("n")), "ret_bb", "else_bb")


def test_star_is_undef():
    program = parse_ir("func main() {\nentry:\n  a = * + 1\n  ret a\n}\n")
    assert program.main.block("entry").instructions[0] == BinOp("a", BinaryOp.ADD, UNDEF, Const(1))


def test_negative_literal_and_comments():
    program = parse_ir("# header\nfunc main(p) {\nentry:  # the only block\n  a = p - -3\n  ret a\n}\n")
    assert program.main.params == ("p",)
    assert program.main.block("entry").instructions[0].rhs == Const(-3)


@pytest.mark.parametrize("text, fragment", [
    ("func main() {\nentry:\n  a = b\n  ret a\n}\n", "copy assignment"),
    ("func main() {\nentry:\n  a = 1 ? 2\n  ret a\n}\n", "unexpected character"),
    ("func main() {\nentry:\n  ret 1\n", "missing '}'"),
    ("func main() {\n  a = 1\n}\n", "outside of a labelled block"),
])
def test_syntax_errors(text, fragment):
    with pytest.raises(IRSyntaxError) as info:
        parse_ir(text, source="bad.mir")
    assert fragment in info.value.message
    assert info.value.source == "bad.mir"
    assert info.value.line is not None


@pytest.mark.parametrize("text, fragment", [
    ("func main() {\nentry:\n}\n", "terminator"),
    ("func main() {\nentry:\n  jmp nowhere\n}\n", "undefined label"),
    ("func main() {\nentry:\n  jmp b\nb:\n  ret 0\nb:\n  ret 1\n}\n", "duplicate label"),
    ("func other() {\nentry:\n  ret 0\n}\n", "main"),
])
def test_validation_errors(text, fragment):
    with pytest.raises(IRValidationError) as info:
        parse_ir(text)
    assert fragment in info.value.message


def test_print_parse_round_trip(paper_program, diamond_program, memory_program):
    for program in (paper_program, diamond_program, memory_program):
        text = print_ir(program)
        assert parse_ir(text) == program
        assert print_ir(parse_ir(text)) == text


def test_printer_layout(paper_final):
    assert print_ir(paper_final) == (
        "func main() {\n"
        "entry:\n"
        "  i1 = 1\n"
        "  j1 = 2\n"
        "  i2 = i1 + j1\n"
        "  ret i2\n"
        "}\n"
    )


@pytest.mark.parametrize("name", [
    "paper_example.mir", "paper_example_ssa.mir", "paper_example_final.mir", "diamond.mir", "memory.mir",
])
def test_fixture_prints_as_written(name):
    text = fixture_path(name).read_text()
    # drop the leading comment line
    assert print_ir(parse_ir(text, source=name)) == text.split("\n", 1)[1]


@pytest.mark.property
def test_generated_programs_round_trip():
    rng = random.Random(11)
    for _ in range(500):
        program = random_program(rng)
        assert parse_ir(print_ir(program)) == program


def test_parser_flags_unreachable_blocks(log_events):
    parse_ir("func main(a) {\nentry:\n  ret a\ndead:\n  ret 0\n}\n", source="dead.mir")
    event = next(e for e in log_events if e["event"] == "unreachable blocks")
    assert event["log_level"] == "warning"
    assert (event["source"], event["blocks"]) == ("dead.mir", ["dead"])


def test_interpret_paper_example(paper_program, machine8):
    result = interpret(paper_program, machine8)
    assert result.return_value == 3
    assert result.prints == []
    assert result.decisions() == (True,)


def test_interpret_ssa_fixture(paper_ssa):
    assert interpret(paper_ssa.program).return_value == 3


def test_interpret_diamond(diamond_program, machine8):
    # x = 4 > y = 2: left arm, z = 4 - 10 wraps
    result = interpret(diamond_program, machine8, {"a": 3, "b": 1})
    assert result.decisions() == (True,)
    assert result.prints == [2]
    assert result.return_value == wrap((4 - 10) * 3, 8)

    result = interpret(diamond_program, machine8, {"a": 0, "b": 5})
    assert result.decisions() == (False,)
    assert result.return_value == (10 + 10) * 3


def test_interpret_memory(memory_program, machine8):
    # the store to base overwrites addr when p = 0
    assert interpret(memory_program, machine8, {"p": 0, "v": 5}).return_value == 14
    assert interpret(memory_program, machine8, {"p": 1, "v": 5}).return_value == 12


def test_missing_input(diamond_program):
    with pytest.raises(MissingInputError):
        interpret(diamond_program, inputs={"a": 1})


def test_fuel_exhaustion():
    program = parse_ir("func main() {\nentry:\n  jmp entry2\nentry2:\n  jmp entry2\n}\n")
    with pytest.raises(FuelExhaustedError):
        interpret(program, fuel=50)


def test_undef_policies():
    program = parse_ir("func main() {\nentry:\n  a = undef\n  b = a + undef\n  print a\n  ret b\n}\n")
    fixed = interpret(program, MachineConfig(bit_width=8, undef_policy=UndefPolicy.fixed(5)))
    assert fixed.prints == [5]
    assert fixed.return_value == 10

    seeded = MachineConfig(bit_width=8, undef_policy=UndefPolicy.seeded(3))
    first, second = interpret(program, seeded), interpret(program, seeded)
    assert first.return_value == second.return_value
    assert first.trace == second.trace


def test_trace_records_every_step(paper_program):
    result = interpret(paper_program)
    # 5 entry + 4 L + 1 ret
    assert result.steps == 10
    assert result.trace[-1].instruction == Return(Var("i"))


def test_signed_comparisons():
    assert to_signed(0xFF, 8) == -1
    assert apply_relation(Relation.LT, 0xFF, 1, 8)
    assert not apply_relation(Relation.GT, 0x80, 0x7F, 8)
    assert wrap(-1, 4) == 15


def test_cfg_relations(paper_program):
    cfg = ControlFlowGraph(paper_program.main)
    assert cfg.succ["L"] == ("ret_bb", "else_bb")
    assert sorted(cfg.preds["L"]) == ["else_bb", "entry"]
    assert cfg.dominates("L", "else_bb")
    assert not cfg.dominates("else_bb", "L")
    assert cfg.may_precede(("else_bb", 0), ("L", 0))
    assert not cfg.may_precede(("ret_bb", 0), ("L", 0))
    assert cfg.frontiers["else_bb"] == frozenset({"L"})


def test_condition_without_relation():
    program = parse_ir("func main(p) {\nentry:\n  br p, yes, no\nyes:\n  ret 1\nno:\n  ret 0\n}\n")
    assert program.main.block("entry").terminator.cond == Var("p")
    assert interpret(program, inputs={"p": 2}).return_value == 1
    assert interpret(program, inputs={"p": 0}).return_value == 0
    assert isinstance(program.main.block("yes").terminator, Return)
    assert not isinstance(program.main.block("yes").terminator, Jump)
    assert ConstAssign("a", Const(1)).dest == "a"
