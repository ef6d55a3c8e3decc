"""
Machine semantics shared by the interpreter, the folding passes and the oracle.

Values are unsigned integers in [0, 2**bit_width); comparisons read them as
two's-complement signed numbers.
"""

import random
from typing import Callable, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import settings
from .model import BinaryOp, Relation


class UndefPolicy(BaseModel):
    """How an UnDef read is resolved to a concrete value."""

    model_config = ConfigDict(frozen=True)

    kind: Literal["fixed", "seeded-random"] = "fixed"
    value: int = 0
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _seed_required(self):
        if self.kind == "seeded-random" and self.seed is None:
            raise ValueError("seeded-random undef policy requires a seed")
        return self

    @classmethod
    def fixed(cls, value: int = 0) -> "UndefPolicy":
        return cls(kind="fixed", value=value)

    @classmethod
    def seeded(cls, seed: int) -> "UndefPolicy":
        return cls(kind="seeded-random", seed=seed)

    def resolver(self, bit_width: int) -> Callable[[], int]:
        """Fresh value source; each call to the result is one UnDef read."""
        if self.kind == "fixed":
            value = wrap(self.value, bit_width)
            return lambda: value
        rng = random.Random(self.seed)
        return lambda: rng.getrandbits(bit_width)


class MachineConfig(BaseModel):
    """Word width and UnDef resolution."""

    model_config = ConfigDict(frozen=True)

    bit_width: int = Field(default=32, ge=2, le=64)
    undef_policy: UndefPolicy = Field(default_factory=UndefPolicy)

    def wrap(self, value: int) -> int:
        return wrap(value, self.bit_width)


def default_machine() -> MachineConfig:
    """MachineConfig drawn from the environment settings."""
    machine = settings.machine
    if machine.undef_seed is not None:
        policy = UndefPolicy.seeded(machine.undef_seed)
    else:
        policy = UndefPolicy.fixed(machine.undef_value)
    return MachineConfig(bit_width=machine.bit_width, undef_policy=policy)


def wrap(value: int, bit_width: int) -> int:
    return value & ((1 << bit_width) - 1)


def to_signed(value: int, bit_width: int) -> int:
    value = wrap(value, bit_width)
    if value >= 1 << (bit_width - 1):
        return value - (1 << bit_width)
    return value


def apply_binary(op: BinaryOp, lhs: int, rhs: int, bit_width: int) -> int:
    if op is BinaryOp.ADD:
        result = lhs + rhs
    elif op is BinaryOp.SUB:
        result = lhs - rhs
    else:
        result = lhs * rhs
    return wrap(result, bit_width)


def apply_relation(rel: Relation, lhs: int, rhs: int, bit_width: int) -> bool:
    a, b = to_signed(lhs, bit_width), to_signed(rhs, bit_width)
    if rel is Relation.LT:
        return a < b
    if rel is Relation.LE:
        return a <= b
    if rel is Relation.GT:
        return a > b
    if rel is Relation.GE:
        return a >= b
    if rel is Relation.EQ:
        return a == b
    return a != b
