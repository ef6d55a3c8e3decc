"""
IR Package

The mini intermediate representation:
- Immutable program model and `.mir` text format
- Control-flow graph, dominance and liveness
- Concrete interpreter with configurable machine semantics
- SSA construction and validation
"""

from .model import (
    UNDEF,
    BinaryOp,
    BinOp,
    Block,
    Branch,
    Compare,
    Comparison,
    Const,
    ConstAssign,
    Function,
    Instruction,
    InstrId,
    Jump,
    Load,
    Phi,
    Print,
    Program,
    Relation,
    Return,
    Store,
    Undef,
    Var,
)
from .parser import parse_ir
from .printer import print_ir
from .cfg import ControlFlowGraph
from .machine import MachineConfig, UndefPolicy, default_machine
from .interpreter import ExecResult, TraceEvent, interpret
from .ssa import SsaProgram, SsaViolation, build_ssa, ensure_ssa, validate_ssa

__all__ = [
    # Model
    "UNDEF",
    "BinaryOp",
    "BinOp",
    "Block",
    "Branch",
    "Compare",
    "Comparison",
    "Const",
    "ConstAssign",
    "Function",
    "Instruction",
    "InstrId",
    "Jump",
    "Load",
    "Phi",
    "Print",
    "Program",
    "Relation",
    "Return",
    "Store",
    "Undef",
    "Var",

    # Text format
    "parse_ir",
    "print_ir",

    # Structure and execution
    "ControlFlowGraph",
    "MachineConfig",
    "UndefPolicy",
    "default_machine",
    "ExecResult",
    "TraceEvent",
    "interpret",

    # SSA
    "SsaProgram",
    "SsaViolation",
    "build_ssa",
    "ensure_ssa",
    "validate_ssa",
]
