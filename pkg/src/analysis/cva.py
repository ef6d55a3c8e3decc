"""
Change value analysis.

Marks every instruction on a 3-point lattice (Undefined < Unchanged <
Changed). Instructions reading a version of a seed variable are Changed,
and so is everything that data-depends on a Changed instruction; loads
additionally become Changed when a Changed store may run before them.
Control dependence never promotes a mark.

apply_undef then replaces operands of irrelevant instructions with UnDef,
leaving the Changed slice and everything feeding it untouched.
"""

from collections import defaultdict, deque
from enum import IntEnum
from typing import Dict, FrozenSet, Iterable, List, Optional, Set

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..core.config import CvaModeName, settings
from ..core.errors import ConfigError
from ..ir.cfg import ControlFlowGraph
from ..ir.model import UNDEF, ConstAssign, InstrId, Load, Operand, Store, Var
from ..ir.ssa import SsaProgram


logger = structlog.get_logger(__name__)


class Mark(IntEnum):
    """CVA lattice; the integer order is the lattice order."""
    UNDEFINED = 0
    UNCHANGED = 1
    CHANGED = 2


MarkMap = Dict[InstrId, Mark]


class CvaConfig(BaseModel):
    """Seed variables (source names, no version digits) and substitution mode."""

    model_config = ConfigDict(frozen=True)

    seed_vars: FrozenSet[str] = Field(default_factory=frozenset)
    mode: CvaModeName = Field(default_factory=lambda: settings.analysis.cva_mode)

    @field_validator("mode", mode="before")
    @classmethod
    def validate_mode(cls, v):
        if isinstance(v, str):
            return CvaModeName(v.lower())
        return v


def _check_seeds(program: SsaProgram, config: CvaConfig) -> None:
    unknown = sorted(set(config.seed_vars) - set(program.version_map))
    if unknown:
        raise ConfigError(f"seed variables not in program: {', '.join(unknown)}")


def mark_fixpoint(program: SsaProgram, config: CvaConfig,
                  order: Optional[Iterable[InstrId]] = None) -> MarkMap:
    """Run the marking worklist to its fixpoint.

    `order` permutes the initial worklist; the result does not depend on it.
    """
    _check_seeds(program, config)
    fn = program.main
    cfg = ControlFlowGraph(fn)

    marks: MarkMap = {}
    users: Dict[str, List[InstrId]] = defaultdict(list)
    loads: List[InstrId] = []
    reachable: List[InstrId] = []
    for iid, instr in fn.instructions():
        if iid[0] not in cfg.reachable:
            marks[iid] = Mark.UNDEFINED
            continue
        marks[iid] = Mark.UNCHANGED
        reachable.append(iid)
        for name in set(instr.uses()):
            users[name].append(iid)
        if isinstance(instr, Load):
            loads.append(iid)

    seed_names = program.versions_of(config.seed_vars)
    seeds = [iid for iid in reachable if seed_names.intersection(fn.instruction(iid).uses())]
    if order is not None:
        position = {iid: n for n, iid in enumerate(order)}
        seeds.sort(key=lambda iid: position.get(iid, len(position)))

    worklist = deque(seeds)
    promotions = 0
    while worklist:
        iid = worklist.popleft()
        if marks[iid] is Mark.CHANGED:
            continue
        marks[iid] = Mark.CHANGED
        promotions += 1
        instr = fn.instruction(iid)
        if instr.dest is not None:
            worklist.extend(u for u in users[instr.dest] if marks[u] is not Mark.CHANGED)
        if isinstance(instr, Store):
            worklist.extend(
                load for load in loads
                if marks[load] is not Mark.CHANGED and cfg.may_precede(iid, load)
            )

    logger.debug("cva fixpoint", seeds=len(seeds), changed=promotions,
                 instructions=len(marks))
    return marks


def changed_set(marks: MarkMap) -> FrozenSet[InstrId]:
    return frozenset(iid for iid, mark in marks.items() if mark is Mark.CHANGED)


def feeding_closure(program: SsaProgram, roots: Iterable[InstrId]) -> FrozenSet[InstrId]:
    """Instructions the roots transitively read from, the roots included.

    A load reads from every store that may run before it.
    """
    fn = program.main
    cfg = ControlFlowGraph(fn)
    defs = fn.definitions()
    stores = [iid for iid, instr in fn.instructions() if isinstance(instr, Store)]

    closure: Set[InstrId] = set()
    work = list(roots)
    while work:
        iid = work.pop()
        if iid in closure:
            continue
        closure.add(iid)
        instr = fn.instruction(iid)
        work.extend(defs[name] for name in instr.uses() if name in defs)
        if isinstance(instr, Load):
            work.extend(s for s in stores if cfg.may_precede(s, iid))
    return frozenset(closure)


def apply_undef(program: SsaProgram, marks: MarkMap, config: CvaConfig) -> SsaProgram:
    """Replace irrelevant operands with UnDef according to the mode."""
    fn = program.main
    defs = fn.definitions()
    changed = changed_set(marks)
    protected = feeding_closure(program, changed)

    def replaceable(op: Operand) -> bool:
        if not isinstance(op, Var):
            return False
        site = defs.get(op.name)
        if site is None:
            # Parameter: only aggressive mode treats it as irrelevant.
            return config.mode is CvaModeName.AGGRESSIVE and op.name not in program.versions_of(config.seed_vars)
        if site in changed:
            return False
        if config.mode is CvaModeName.AGGRESSIVE:
            return True
        return isinstance(fn.instruction(site), ConstAssign)

    rewritten = 0

    def rewrite(iid: InstrId, instr):
        nonlocal rewritten
        if iid in protected or marks.get(iid) is Mark.CHANGED:
            return instr
        new = instr.map_operands(lambda op: UNDEF if replaceable(op) else op)
        if new != instr:
            rewritten += 1
        return new

    new_fn = fn.map_instructions(rewrite)
    symbolic = frozenset(
        fn.instruction(iid).dest for iid in protected if fn.instruction(iid).dest is not None
    )
    logger.info("cva applied", mode=config.mode.value, changed=len(changed),
                protected=len(protected), rewritten=rewritten)
    return SsaProgram(program.program.with_main(new_fn), program.version_map,
                      program.symbolic_names | symbolic)


def cva(program: SsaProgram, config: CvaConfig) -> SsaProgram:
    """Mark to fixpoint, then substitute UnDef."""
    return apply_undef(program, mark_fixpoint(program, config), config)
