import subprocess

import pytest

from src.cli import SAMPLE_ENV, main
from src.core.config import fixture_path
from src.ir import print_ir


def fixture(name: str) -> str:
    return str(fixture_path(name))


def test_no_command_is_a_usage_error(capsys):
    assert main([]) == 1
    assert "usage: pfq" in capsys.readouterr().err


def test_demo_paper(capsys, paper_final):
    assert main(["demo-paper"]) == 0
    out = capsys.readouterr().out
    assert out == (
        "conjuncts(original) = 8\n"
        "conjuncts(after-dce) = 7\n"
        "conjuncts(after-cva+opt) = 3\n"
        "query: i1 = 1 ∧ j1 = 2 ∧ i2 = i1 + j1\n"
        "\n"
        + print_ir(paper_final)
        + "\n"
        + fixture_path("paper_query.smt2").read_text()
    )


def test_missing_file(capsys):
    assert main(["parse", "no/such/file.mir"]) == 2
    assert capsys.readouterr().err.startswith("no/such/file.mir: cannot read file")


def test_syntax_error_reports_position(tmp_path, capsys):
    bad = tmp_path / "bad.mir"
    bad.write_text("func main() {\nentry:\n  x = = 1\n}\n")
    assert main(["parse", str(bad)]) == 2
    assert capsys.readouterr().err.startswith(f"{bad}:3:")


def test_parse_prints_canonical_text(capsys, diamond_program):
    assert main(["parse", fixture("diamond.mir")]) == 0
    assert capsys.readouterr().out == print_ir(diamond_program)


def test_ssa_check_lists_violations(capsys):
    assert main(["ssa", "--check", fixture("paper_example.mir")]) == 2
    assert ": multiple definitions: " in capsys.readouterr().out
    assert main(["ssa", "--check", fixture("paper_example_ssa.mir")]) == 0


def test_cva_marks(capsys):
    assert main(["cva", fixture("paper_example_ssa.mir"), "--vars", "i", "--marks"]) == 0
    rows = [line.split(None, 1) for line in capsys.readouterr().out.splitlines()]
    changed = [instr for mark, instr in rows if mark == "changed"]
    assert changed == ["i2 = i1 + j1", "ret i2"]


def test_emit_final_program_as_stp(capsys):
    assert main(["emit", fixture("paper_example_final.mir"), "--format", "stp"]) == 0
    assert capsys.readouterr().out == fixture_path("paper_query.stp").read_text()


def test_pathcond_with_inputs(capsys):
    assert main(["pathcond", fixture("diamond.mir"), "--inputs", "a=3,b=1"]) == 0
    out = capsys.readouterr().out
    assert "decisions: T\n" in out
    assert "target: ret w1 @ join\n" in out


def test_bad_input_value(capsys):
    assert main(["pathcond", fixture("diamond.mir"), "--inputs", "a=three"]) == 1
    assert "is not an integer" in capsys.readouterr().err


def test_convert(capsys):
    assert main(["convert", fixture("paper_query.stp"), "--to", "smt2"]) == 0
    assert capsys.readouterr().out == fixture_path("paper_query.smt2").read_text()


def test_metrics(capsys):
    assert main(["metrics", fixture("paper_query.stp")]) == 0
    assert capsys.readouterr().out == (
        "lines(stp) = 8\n"
        "lines(smt2) = 8\n"
        "conciseness = 1.00\n"
        "ite = 0\n"
        "store = 0\n"
        "ratio = -\n"
    )


def test_solve(capsys):
    assert main(["solve", "--width", "4", fixture("paper_query.smt2")]) == 0
    assert capsys.readouterr().out == "sat\ni1 = 1\nj1 = 2\ni2 = 3\n"


def test_solve_needs_a_small_width(capsys):
    assert main(["solve", fixture("paper_query.smt2")]) == 2
    assert "width override" in capsys.readouterr().err


def test_split(tmp_path, capsys):
    out_dir = tmp_path / "series"
    assert main(["split", fixture("paper_example_ssa.mir"), "-k", "2", "--format", "stp",
                 "--out-dir", str(out_dir)]) == 0
    assert capsys.readouterr().out.splitlines() == [
        f"{out_dir / 'paper_example_ssa_1.stp'} conjuncts=4",
        f"{out_dir / 'paper_example_ssa_2.stp'} conjuncts=8",
    ]
    assert (out_dir / "paper_example_ssa_2.stp").read_text().count("ASSERT(") == 8


def test_split_needs_one_size_option(capsys):
    assert main(["split", fixture("paper_example_ssa.mir"), "-k", "2", "--step", "3"]) == 1
    assert "exactly one of" in capsys.readouterr().err


def test_split_range_error(capsys):
    assert main(["split", fixture("paper_example_ssa.mir"), "-k", "9"]) == 2


def test_shrink(capsys):
    assert main(["shrink", fixture("paper_example_ssa.mir"), "--vars", "i"]) == 0
    assert capsys.readouterr().out == (
        "seeds: i\n"
        "conjuncts(before) = 8\n"
        "conjuncts(after) = 3\n"
        "reduction = 62.5%\n"
    )


def test_shrink_requires_vars():
    with pytest.raises(SystemExit) as info:
        main(["shrink", fixture("paper_example_ssa.mir")])
    assert info.value.code == 1


def test_bench_prints_csv(capsys, mocker):
    mocker.patch("src.bench.harness.subprocess.run",
                 return_value=subprocess.CompletedProcess(args=[], returncode=0, stdout="unsat\n", stderr=""))
    assert main(["bench", fixture("paper_query.smt2"), "--solver", "fake=fake {file}", "--reps", "1"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header == "name,solver,lines,conjuncts,ite,store,ratio,time,time_diff,verdict"
    assert row.startswith("paper_query.smt2,fake,8,3,0,0,,")
    assert row.endswith(",unsat")


def test_bench_bad_template(capsys):
    assert main(["bench", fixture("paper_query.smt2"), "--solver", "fake=fake"]) == 1
    assert "exactly one" in capsys.readouterr().err


def test_config(capsys):
    assert main(["config"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("app: ")
    assert "analysis: cva_mode=conservative" in out


def test_create_env(tmp_path, capsys):
    target = tmp_path / ".env"
    assert main(["create-env", "-o", str(target)]) == 0
    assert target.read_text() == SAMPLE_ENV
    assert f"Created {target} with default configuration" in capsys.readouterr().out
    assert main(["create-env", "-o", str(target)]) == 1
    assert main(["create-env", "-o", str(target), "--force"]) == 0


UNDEF_BRANCH = "func main() {\nentry:\n  a = undef\n  br a > 0, yes, no\nyes:\n  ret 1\nno:\n  ret 2\n}\n"


@pytest.mark.parametrize("arm, value", [("then", 1), ("else", 2)])
def test_opt_undef_branch(tmp_path, capsys, arm, value):
    source = tmp_path / "undef.mir"
    source.write_text(UNDEF_BRANCH)
    assert main(["opt", str(source), f"--undef-branch={arm}"]) == 0
    assert capsys.readouterr().out == f"func main() {{\nentry:\n  ret {value}\n}}\n"


def test_cva_and_opt_write_output_files(tmp_path, capsys):
    assert main(["cva", fixture("paper_example_ssa.mir"), "--vars", "i"]) == 0
    starred = capsys.readouterr().out
    target = tmp_path / "cva.mir"
    assert main(["cva", fixture("paper_example_ssa.mir"), "--vars", "i", "-o", str(target)]) == 0
    assert capsys.readouterr().out == ""
    assert target.read_text() == starred

    target = tmp_path / "opt.mir"
    assert main(["opt", fixture("paper_example_ssa.mir"), "--vars", "i", "-o", str(target)]) == 0
    assert target.read_text() == fixture_path("paper_example_final.mir").read_text().split("\n", 1)[1]


@pytest.mark.parametrize("flag", ["--path-decisions", "--decisions"])
def test_pathcond_path_decisions(capsys, flag):
    assert main(["pathcond", fixture("diamond.mir"), flag, "F"]) == 0
    out = capsys.readouterr().out
    assert "decisions: F\n" in out
    assert "target: ret w1 @ join\n" in out


def test_ssa_check_reports_unreachable_blocks(tmp_path, capsys):
    source = tmp_path / "dead.mir"
    source.write_text("func main(a) {\nentry:\n  ret a\ndead:\n  ret 0\n}\n")
    assert main(["ssa", "--check", str(source)]) == 2
    assert capsys.readouterr().out == "dead[0]: unreachable block: block dead is unreachable from entry\n"
