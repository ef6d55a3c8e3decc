import pytest

from src.core.errors import PathError
from src.ir import build_ssa, ensure_ssa, parse_ir
from src.symbolic import PathSpec, dump_pc, enumerate_paths, load_pc, path_condition


def test_dump_layout(paper_ssa):
    pc = path_condition(paper_ssa, PathSpec.concrete())
    assert dump_pc(pc) == (
        "# pfq path condition\n"
        "target: ret i2 @ ret_bb\n"
        "inputs: \n"
        "fresh: \n"
        "decisions: T\n"
        "def i1 = 1\n"
        "def j1 = 2\n"
        "def k1 = 3\n"
        "def n1 = 4\n"
        "def i2 = i1 + j1\n"
        "def l1 = j1 + 1\n"
        "def j2 = j1 + 2\n"
        "branch T j2 >= n1\n"
    )


def test_reload_fixture_paths(paper_ssa, diamond_program, memory_program):
    conditions = [path_condition(paper_ssa, PathSpec.directed([False, False, True]))]
    conditions += enumerate_paths(build_ssa(diamond_program))
    conditions.append(path_condition(build_ssa(memory_program), PathSpec.concrete({"p": 0, "v": 3})))
    for pc in conditions:
        assert load_pc(dump_pc(pc)) == pc


def test_reload_fresh_names():
    program = ensure_ssa(parse_ir("func main() {\nentry:\n  a = undef * 3\n  ret a\n}\n"))
    pc = path_condition(program, PathSpec.concrete())
    text = dump_pc(pc)
    assert "fresh: undef_1" in text
    assert load_pc(text).fresh_names == ("undef_1",)


@pytest.mark.parametrize("line, fragment", [
    ("def = 3", "expected name or literal"),
    ("def 3 = 4", "definition target"),
    ("branch X a < b", "polarity"),
    ("branch T a + b", "comparison"),
    ("frobnicate a", "unknown conjunct kind"),
    ("def a = 1 2", "unexpected token"),
])
def test_load_errors(line, fragment):
    with pytest.raises(PathError) as info:
        load_pc(f"# pfq path condition\n{line}\n", source="bad.pc")
    assert fragment in info.value.message
    assert info.value.line == 2
    assert info.value.source == "bad.pc"
