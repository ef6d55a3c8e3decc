"""
Control-flow structure of a Function.

Dominators are computed with the iterative dataflow algorithm over the
reachable subgraph; dominance frontiers use the predecessor-runner walk.
Every derived relation is computed lazily and cached on the instance.
"""

from functools import cached_property, reduce
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from .model import Block, Function, InstrId, Phi, Var


class ControlFlowGraph:
    """Successor, predecessor and dominance relations of one function."""

    def __init__(self, fn: Function):
        self.fn = fn
        self.entry = fn.entry
        self.labels: Tuple[str, ...] = tuple(block.label for block in fn.blocks)
        self.succ: Dict[str, Tuple[str, ...]] = {
            block.label: (block.terminator.successors() if block.terminator else ())
            for block in fn.blocks
        }
        self.preds: Dict[str, List[str]] = {label: [] for label in self.labels}
        for label in self.labels:
            for target in self.succ[label]:
                if label not in self.preds[target]:
                    self.preds[target].append(label)

    @cached_property
    def rpo(self) -> Tuple[str, ...]:
        """Reachable labels in reverse postorder (successors visited in order)."""
        order: List[str] = []
        seen: Set[str] = {self.entry}
        stack = [(self.entry, iter(self.succ[self.entry]))]
        while stack:
            label, children = stack[-1]
            for child in children:
                if child not in seen:
                    seen.add(child)
                    stack.append((child, iter(self.succ[child])))
                    break
            else:
                stack.pop()
                order.append(label)
        return tuple(reversed(order))

    @cached_property
    def reachable(self) -> FrozenSet[str]:
        return frozenset(self.rpo)

    def reachable_preds(self, label: str) -> List[str]:
        return [p for p in self.preds[label] if p in self.reachable]

    @cached_property
    def dominators(self) -> Dict[str, FrozenSet[str]]:
        """Map each reachable block to the set of blocks dominating it."""
        everything = frozenset(self.rpo)
        dom: Dict[str, FrozenSet[str]] = {label: everything for label in self.rpo}
        dom[self.entry] = frozenset({self.entry})

        changed = True
        while changed:
            changed = False
            for label in self.rpo[1:]:
                preds = self.reachable_preds(label)
                new = frozenset({label}).union(
                    reduce(lambda a, b: a & b, (dom[p] for p in preds))
                )
                if new != dom[label]:
                    dom[label] = new
                    changed = True
        return dom

    def dominates(self, a: str, b: str) -> bool:
        return a in self.dominators.get(b, ())

    @cached_property
    def idom(self) -> Dict[str, Optional[str]]:
        """Immediate dominator of each reachable block; None for the entry."""
        result: Dict[str, Optional[str]] = {self.entry: None}
        for label in self.rpo[1:]:
            strict = self.dominators[label] - {label}
            # The closest strict dominator is the one dominated by all the others.
            result[label] = max(strict, key=lambda d: len(self.dominators[d]))
        return result

    @cached_property
    def dom_tree(self) -> Dict[str, Tuple[str, ...]]:
        children: Dict[str, List[str]] = {label: [] for label in self.rpo}
        for label in self.rpo[1:]:
            children[self.idom[label]].append(label)
        return {label: tuple(kids) for label, kids in children.items()}

    @cached_property
    def frontiers(self) -> Dict[str, FrozenSet[str]]:
        df: Dict[str, Set[str]] = {label: set() for label in self.rpo}
        for label in self.rpo:
            preds = self.reachable_preds(label)
            if len(preds) < 2:
                continue
            for pred in preds:
                runner = pred
                while runner != self.idom[label]:
                    df[runner].add(label)
                    runner = self.idom[runner]
        return {label: frozenset(blocks) for label, blocks in df.items()}

    def iterated_frontier(self, blocks) -> Set[str]:
        """DF+ of a set of blocks."""
        result: Set[str] = set()
        work = [b for b in blocks if b in self.reachable]
        while work:
            block = work.pop()
            for frontier in self.frontiers[block]:
                if frontier not in result:
                    result.add(frontier)
                    work.append(frontier)
        return result

    @cached_property
    def _successor_closure(self) -> Dict[str, FrozenSet[str]]:
        """Blocks reachable from each block through at least one edge."""
        closure = {}
        for label in self.labels:
            seen: Set[str] = set()
            work = list(self.succ[label])
            while work:
                nxt = work.pop()
                if nxt not in seen:
                    seen.add(nxt)
                    work.extend(self.succ[nxt])
            closure[label] = frozenset(seen)
        return closure

    def may_precede(self, first: InstrId, second: InstrId) -> bool:
        """True if some execution runs `first` before `second`."""
        (a, i), (b, j) = first, second
        if a == b and i < j:
            return True
        return b in self._successor_closure[a]

    @cached_property
    def liveness(self) -> Tuple[Dict[str, FrozenSet[str]], Dict[str, FrozenSet[str]]]:
        """(live_in, live_out) per block; phi operands are live out of their edge."""
        use: Dict[str, Set[str]] = {}
        defs: Dict[str, Set[str]] = {}
        phi_uses: Dict[Tuple[str, str], Set[str]] = {}
        for block in self.fn.blocks:
            used, defined = set(), set()
            for instr in block.instructions:
                if isinstance(instr, Phi):
                    for pred, op in instr.incoming:
                        if isinstance(op, Var):
                            phi_uses.setdefault((pred, block.label), set()).add(op.name)
                else:
                    used.update(name for name in instr.uses() if name not in defined)
                if instr.dest is not None:
                    defined.add(instr.dest)
            use[block.label] = used
            defs[block.label] = defined

        live_in: Dict[str, Set[str]] = {label: set() for label in self.labels}
        live_out: Dict[str, Set[str]] = {label: set() for label in self.labels}
        changed = True
        while changed:
            changed = False
            for label in reversed(self.labels):
                out: Set[str] = set()
                for succ in self.succ[label]:
                    phi_dests = {phi.dest for phi in self.fn.block(succ).phis()}
                    out |= live_in[succ] - phi_dests
                    out |= phi_uses.get((label, succ), set())
                inn = use[label] | (out - defs[label])
                if out != live_out[label] or inn != live_in[label]:
                    live_out[label], live_in[label] = out, inn
                    changed = True
        return (
            {k: frozenset(v) for k, v in live_in.items()},
            {k: frozenset(v) for k, v in live_out.items()},
        )

    def live_in(self, label: str) -> FrozenSet[str]:
        return self.liveness[0][label]


def remove_unreachable(fn: Function) -> Function:
    """Delete blocks unreachable from the entry, with the phi arms they feed."""
    cfg = ControlFlowGraph(fn)
    if len(cfg.reachable) == len(fn.blocks):
        return fn
    blocks = []
    for block in fn.blocks:
        if block.label not in cfg.reachable:
            continue
        blocks.append(Block(block.label, tuple(
            Phi(instr.dest, tuple((p, op) for p, op in instr.incoming if p in cfg.reachable))
            if isinstance(instr, Phi) else instr
            for instr in block.instructions
        )))
    return fn.with_blocks(blocks)
