"""
8-bit nonlinear feedback shift register used as a byte substitution.

The register shifts toward b0; the bit entering at b7 is

    f = b0 ^ b3 ^ (b1 & b2) ^ (b4 & b6)

Because the outgoing bit b0 enters f linearly, each step can be undone:
after a step the old b1..b7 sit in b0..b6 and b0 is recovered from b7.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class NlfsrSpec(BaseModel):
    """Public description of the register and its feedback function."""
    model_config = ConfigDict(frozen=True)

    width: int = Field(default=8, description="Register width in bits")
    steps: int = Field(default=8, ge=1, description="Shift steps per substituted byte")
    linear_taps: Tuple[int, ...] = Field(default=(0, 3), description="Bits XORed into the feedback")
    and_terms: Tuple[Tuple[int, int], ...] = Field(
        default=((1, 2), (4, 6)), description="Bit pairs ANDed, then XORed into the feedback"
    )

    @model_validator(mode="after")
    def _invertible(self) -> "NlfsrSpec":
        if self.width != 8:
            raise ValueError("only 8-bit registers substitute bytes")
        bits = set(self.linear_taps) | {b for term in self.and_terms for b in term}
        if any(not 0 <= b < self.width for b in bits):
            raise ValueError(f"tap positions must lie in [0, {self.width})")
        if self.linear_taps.count(0) != 1 or any(0 in term for term in self.and_terms):
            raise ValueError("b0 must enter the feedback linearly and only once for the step to be invertible")
        return self

    def feedback(self, state: int) -> int:
        bit = 0
        for tap in self.linear_taps:
            bit ^= (state >> tap) & 1
        for a, b in self.and_terms:
            bit ^= ((state >> a) & 1) & ((state >> b) & 1)
        return bit


DEFAULT_NLFSR = NlfsrSpec()


def _step(spec: NlfsrSpec, state: int) -> int:
    return (state >> 1) | (spec.feedback(state) << (spec.width - 1))


def _unstep(spec: NlfsrSpec, state: int) -> int:
    top = spec.width - 1
    upper = (state << 1) & ((1 << spec.width) - 1)  # old b1..b7, b0 unknown
    b0 = ((state >> top) & 1) ^ spec.feedback(upper)
    return upper | b0


def nlfsr_substitute(spec: NlfsrSpec, b: int) -> int:
    state = b & 0xFF
    for _ in range(spec.steps):
        state = _step(spec, state)
    return state


def nlfsr_inverse(spec: NlfsrSpec, b: int) -> int:
    state = b & 0xFF
    for _ in range(spec.steps):
        state = _unstep(spec, state)
    return state


@lru_cache(maxsize=8)
def substitution_table(spec: NlfsrSpec) -> np.ndarray:
    table = np.array([nlfsr_substitute(spec, b) for b in range(256)], dtype=np.int64)
    table.setflags(write=False)
    return table


@lru_cache(maxsize=8)
def inverse_table(spec: NlfsrSpec) -> np.ndarray:
    table = np.empty(256, dtype=np.int64)
    table[substitution_table(spec)] = np.arange(256, dtype=np.int64)
    table.setflags(write=False)
    return table
