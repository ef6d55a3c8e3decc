"""
SSA construction and validation.

build_ssa places phis at the iterated dominance frontier of each variable's
definition blocks, keeps only those where the variable is live on entry,
and renames along the dominator tree. Parameters keep their names; every
definition of `x` becomes `x<n>` with n counting from 1 and skipping names
the program already uses.
"""

import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Set, Tuple

import structlog

from ..core.errors import SsaConstructionError
from .cfg import ControlFlowGraph, remove_unreachable
from .model import Block, Function, InstrId, Operand, Phi, Program, Var


logger = structlog.get_logger(__name__)

_VERSION_SUFFIX = re.compile(r"\d*(?:__\d+)?$")


def source_name(name: str) -> str:
    """Strip SSA version digits (and a dynamic-instance suffix) from a name."""
    stripped = _VERSION_SUFFIX.sub("", name)
    return stripped or name


@dataclass(frozen=True)
class SsaProgram:
    """A program in SSA form plus the map from source variables to versions.

    `symbolic_names` lists the SSA names a change value analysis has
    declared opaque; optimisation passes must not fold them.
    """

    program: Program
    version_map: Mapping[str, Tuple[str, ...]] = field(default_factory=dict)
    symbolic_names: FrozenSet[str] = frozenset()

    @property
    def main(self) -> Function:
        return self.program.main

    @classmethod
    def from_program(cls, program: Program) -> "SsaProgram":
        """Wrap a program already in SSA form, inferring versions from names."""
        fn = program.main
        versions: Dict[str, List[str]] = defaultdict(list)
        for name in list(fn.params) + list(fn.definitions()):
            versions[source_name(name)].append(name)
        return cls(program, {var: tuple(names) for var, names in versions.items()})

    def source_variables(self) -> Tuple[str, ...]:
        return tuple(self.version_map)

    def versions_of(self, variables: Iterable[str]) -> FrozenSet[str]:
        names: Set[str] = set()
        for var in variables:
            names.update(self.version_map.get(var, ()))
        return frozenset(names)

    def with_program(self, program: Program) -> "SsaProgram":
        """Same metadata over a rewritten program; vanished names are dropped."""
        fn = program.main
        alive = set(fn.params) | set(fn.definitions())
        versions = {
            var: tuple(n for n in names if n in alive)
            for var, names in self.version_map.items()
        }
        return SsaProgram(
            program,
            {var: names for var, names in versions.items() if names},
            frozenset(n for n in self.symbolic_names if n in alive),
        )


# Validation

MULTIPLE_DEFINITIONS = "multiple definitions"
DOMINANCE = "dominance"
UNDEFINED_NAME = "undefined name"
PHI_PLACEMENT = "phi placement"
PHI_PREDECESSORS = "phi predecessors"
UNREACHABLE_BLOCK = "unreachable block"


@dataclass(frozen=True)
class SsaViolation:
    kind: str
    name: str
    location: Optional[InstrId]
    message: str

    def __str__(self) -> str:
        where = f"{self.location[0]}[{self.location[1]}]" if self.location else "<params>"
        return f"{where}: {self.kind}: {self.message}"


def validate_ssa(program: Program) -> List[SsaViolation]:
    """Single-assignment, dominance and reachability violations of `main`; empty when valid."""
    fn = program.main
    cfg = ControlFlowGraph(fn)
    violations: List[SsaViolation] = []

    def_sites: Dict[str, List[Optional[InstrId]]] = defaultdict(list)
    for param in fn.params:
        def_sites[param].append(None)
    for iid, instr in fn.instructions():
        if instr.dest is not None:
            def_sites[instr.dest].append(iid)

    for name, sites in def_sites.items():
        if len(sites) > 1:
            violations.append(SsaViolation(
                MULTIPLE_DEFINITIONS, name, sites[1],
                f"{name} is defined {len(sites)} times",
            ))

    def check_use(name: str, use_block: str, use_index: Optional[int], at: InstrId) -> None:
        sites = def_sites.get(name)
        if not sites:
            violations.append(SsaViolation(UNDEFINED_NAME, name, at, f"{name} is never defined"))
            return
        if len(sites) > 1 or sites[0] is None:
            return
        def_block, def_index = sites[0]
        if def_block == use_block:
            ok = use_index is None or def_index < use_index
        else:
            ok = def_block in cfg.reachable and cfg.dominates(def_block, use_block)
        if not ok:
            violations.append(SsaViolation(
                DOMINANCE, name, at,
                f"definition of {name} in {def_block} does not dominate its use",
            ))

    for block in fn.blocks:
        if block.label not in cfg.reachable:
            violations.append(SsaViolation(
                UNREACHABLE_BLOCK, block.label, (block.label, 0),
                f"block {block.label} is unreachable from {fn.entry}",
            ))

    for label in cfg.rpo:
        block = fn.block(label)
        preds = set(cfg.reachable_preds(label))
        in_head = True
        for index, instr in enumerate(block.instructions):
            iid = (label, index)
            if isinstance(instr, Phi):
                if not in_head:
                    violations.append(SsaViolation(PHI_PLACEMENT, instr.dest, iid,
                                                   "phi after a non-phi instruction"))
                arms = [pred for pred, _ in instr.incoming if pred in cfg.reachable]
                if set(arms) != preds or len(arms) != len(set(arms)):
                    violations.append(SsaViolation(
                        PHI_PREDECESSORS, instr.dest, iid,
                        f"phi arms {sorted(arms)} do not match predecessors {sorted(preds)}",
                    ))
                for pred, op in instr.incoming:
                    if isinstance(op, Var) and pred in cfg.reachable:
                        # A phi operand is used at the end of its predecessor.
                        check_use(op.name, pred, None, iid)
            else:
                in_head = False
                for name in instr.uses():
                    check_use(name, label, index, iid)

    return violations


# Construction

def build_ssa(program: Program) -> SsaProgram:
    """Convert `main` to SSA form."""
    fn = program.main
    if any(isinstance(instr, Phi) for _, instr in fn.instructions()):
        raise SsaConstructionError("input already contains phi instructions")

    fn = _reachable_part(program).main
    cfg = ControlFlowGraph(fn)

    variables = fn.variables()
    def_blocks: Dict[str, Set[str]] = defaultdict(set)
    for param in fn.params:
        def_blocks[param].add(fn.entry)
    for (label, _), instr in fn.instructions():
        if instr.dest is not None:
            def_blocks[instr.dest].add(label)

    phi_vars: Dict[str, List[str]] = {label: [] for label in cfg.labels}
    for var in variables:
        for label in cfg.iterated_frontier(def_blocks[var]):
            if var in cfg.live_in(label):
                phi_vars[label].append(var)

    renamer = _Renamer(fn, cfg, phi_vars)
    new_fn = renamer.run()
    versions = {var: tuple(names) for var, names in renamer.versions.items() if names}
    logger.debug("built ssa", phis=sum(len(v) for v in phi_vars.values()),
                 names=sum(len(v) for v in versions.values()))
    return SsaProgram(program.with_main(new_fn), versions)


class _Renamer:
    """Dominator-tree renaming with one name stack per source variable."""

    def __init__(self, fn: Function, cfg: ControlFlowGraph, phi_vars: Dict[str, List[str]]):
        self.fn = fn
        self.cfg = cfg
        self.phi_vars = phi_vars
        self.used: Set[str] = set(fn.variables())
        self.counters: Dict[str, int] = defaultdict(int)
        self.versions: Dict[str, List[str]] = {p: [p] for p in fn.params}
        self.stacks: Dict[str, List[str]] = {p: [p] for p in fn.params}
        self.phi_dests: Dict[Tuple[str, str], str] = {}
        self.phi_args: Dict[Tuple[str, str], List[Tuple[str, Operand]]] = defaultdict(list)
        self.bodies: Dict[str, list] = {}

    def fresh(self, var: str) -> str:
        while True:
            self.counters[var] += 1
            candidate = f"{var}{self.counters[var]}"
            if candidate not in self.used:
                break
        self.used.add(candidate)
        self.versions.setdefault(var, []).append(candidate)
        self.stacks.setdefault(var, []).append(candidate)
        return candidate

    def current(self, var: str, label: str) -> str:
        stack = self.stacks.get(var)
        if not stack:
            raise SsaConstructionError(
                f"variable {var!r} may be used before definition (block {label!r})"
            )
        return stack[-1]

    def rename_operand(self, label: str):
        def _apply(op: Operand) -> Operand:
            if isinstance(op, Var):
                return Var(self.current(op.name, label))
            return op
        return _apply

    def visit(self, label: str) -> None:
        saved = {var: len(stack) for var, stack in self.stacks.items()}

        for var in self.phi_vars[label]:
            self.phi_dests[(label, var)] = self.fresh(var)

        body = []
        for instr in self.fn.block(label).instructions:
            instr = instr.map_operands(self.rename_operand(label))
            if instr.dest is not None:
                instr = replace(instr, dest=self.fresh(instr.dest))
            body.append(instr)
        self.bodies[label] = body

        for succ in self.cfg.succ[label]:
            for var in self.phi_vars[succ]:
                self.phi_args[(succ, var)].append((label, Var(self.current(var, label))))

        for child in self.cfg.dom_tree[label]:
            self.visit(child)

        for var in list(self.stacks):
            del self.stacks[var][saved.get(var, 0):]

    def run(self) -> Function:
        self.visit(self.fn.entry)
        blocks = []
        for block in self.fn.blocks:
            phis = tuple(
                Phi(self.phi_dests[(block.label, var)], tuple(self.phi_args[(block.label, var)]))
                for var in self.phi_vars[block.label]
            )
            blocks.append(Block(block.label, phis + tuple(self.bodies[block.label])))
        return self.fn.with_blocks(blocks)


def _reachable_part(program: Program) -> Program:
    fn = remove_unreachable(program.main)
    if fn is not program.main:
        kept = {b.label for b in fn.blocks}
        logger.debug("dropping unreachable blocks",
                     blocks=[b.label for b in program.main.blocks if b.label not in kept])
        program = program.with_main(fn)
    return program


def ensure_ssa(program: Program) -> SsaProgram:
    """Wrap a valid SSA program as-is, or build SSA form for any other.

    Blocks unreachable from the entry are dropped first.
    """
    program = _reachable_part(program)
    if not validate_ssa(program):
        return SsaProgram.from_program(program)
    return build_ssa(program)
