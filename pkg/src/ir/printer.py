"""Canonical `.mir` text: one instruction per line, labels flush left."""

from .model import Function, Program


INDENT = "  "


def format_function(fn: Function) -> str:
    lines = [f"func {fn.name}({', '.join(fn.params)}) {{"]
    for block in fn.blocks:
        lines.append(f"{block.label}:")
        lines.extend(f"{INDENT}{instr}" for instr in block.instructions)
    lines.append("}")
    return "\n".join(lines) + "\n"


def print_ir(program: Program) -> str:
    """Render a program in canonical form; parse_ir(print_ir(p)) == p."""
    return "\n".join(format_function(fn) for fn in program.functions)
