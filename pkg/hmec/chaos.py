"""
The 1-D logistic map x(k+1) = r·x(k)·(1 − x(k)) and the state plumbing the
cipher builds on: stepping, orbits, byte quantization and ciphertext feedback.

Every operation exists in a scalar form (plain floats, used by the stream
cipher) and an array form (numpy float64, used by the grid engine). Both forms
evaluate the same IEEE-754 expressions in the same order, so a state evolved
with either is bit-identical. Keep them in lockstep when editing.
"""

from __future__ import annotations

import math
from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .utilities.errors import ChaoticRegionError

CHAOTIC_R_MIN = 3.57
CHAOTIC_R_MAX = 4.0

# x = 0 and x = 1 are absorbing; states are pinned inside [EPSILON, UPPER].
EPSILON = 1e-12
UPPER = 1.0 - EPSILON

QUANTIZATION_LEVELS = 256
FEEDBACK_DENOMINATOR = 257


class LogisticParams(BaseModel):
    """Map parameter r, restricted to the chaotic region."""
    model_config = ConfigDict(frozen=True)

    r: float = Field(ge=CHAOTIC_R_MIN, le=CHAOTIC_R_MAX, description="Dimensionless map parameter")

    @classmethod
    def unrestricted(cls, r: float) -> "LogisticParams":
        """Parameters outside the chaotic region, for comparison plots only."""
        if not 0.0 < r <= CHAOTIC_R_MAX:
            raise ChaoticRegionError(f"r={r} leaves the unit interval invariant only for 0 < r <= 4")
        return cls.model_construct(r=float(r))


class LogisticState(BaseModel):
    """State x of the chaotic system."""
    model_config = ConfigDict(frozen=True)

    x: float = Field(gt=0.0, lt=1.0, description="Map state in the open unit interval")


class OrbitSample(BaseModel):
    model_config = ConfigDict(frozen=True)

    k: int = Field(ge=0, description="Iteration index")
    x: float = Field(gt=0.0, lt=1.0, description="State at iteration k")


class Orbit(BaseModel):
    r: float
    samples: List[OrbitSample]

    def values(self) -> List[float]:
        return [sample.x for sample in self.samples]


# -- scalar core -------------------------------------------------------------

def clamp(x: float) -> float:
    return min(max(x, EPSILON), UPPER)


def step_value(r: float, x: float) -> float:
    return clamp((r * x) * (1.0 - x))


def iterate_value(r: float, x: float, n: int) -> float:
    for _ in range(n):
        x = min(max((r * x) * (1.0 - x), EPSILON), UPPER)
    return x


def quantize_value(x: float) -> int:
    return min(max(math.floor(x * QUANTIZATION_LEVELS), 0), QUANTIZATION_LEVELS - 1)


def feedback_offset(feedback: int) -> float:
    return (feedback + 1) / FEEDBACK_DENOMINATOR


def perturb_value(x: float, feedback: int) -> float:
    v = x + feedback_offset(feedback)
    return clamp(v - math.floor(v))


def restore_value(x: float, feedback: int) -> float:
    v = x - feedback_offset(feedback)
    return clamp(v - math.floor(v))


# -- public operations ---------------------------------------------------------

def logistic_step(params: LogisticParams, state: LogisticState) -> LogisticState:
    return LogisticState(x=step_value(params.r, state.x))


def logistic_iterate(params: LogisticParams, state: LogisticState, n: int) -> LogisticState:
    if n < 0:
        raise ValueError(f"iteration count must be non-negative, got {n}")
    return LogisticState(x=iterate_value(params.r, state.x, n))


def quantize_state(state: LogisticState) -> int:
    """Byte floor(x·256), clamped to [0, 255]."""
    return quantize_value(state.x)


def perturb_state(state: LogisticState, feedback: int) -> LogisticState:
    """Shift the state by (feedback+1)/257 modulo 1 (ciphertext feedback)."""
    if not 0 <= feedback <= 0xFF:
        raise ValueError(f"feedback must be a byte, got {feedback}")
    return LogisticState(x=perturb_value(state.x, feedback))


def restore_state(state: LogisticState, feedback: int) -> LogisticState:
    """Inverse of perturb_state, up to one clamping epsilon."""
    if not 0 <= feedback <= 0xFF:
        raise ValueError(f"feedback must be a byte, got {feedback}")
    return LogisticState(x=restore_value(state.x, feedback))


def generate_orbit(params: LogisticParams, x0: float, n: int) -> Orbit:
    """First n iterates starting from x0 (x0 itself is sample 0)."""
    if not 0.0 < x0 < 1.0:
        raise ValueError(f"x0 must lie in (0, 1), got {x0}")
    if n < 1:
        raise ValueError(f"orbit length must be at least 1, got {n}")

    samples = [OrbitSample(k=0, x=x0)]
    x = x0
    for k in range(1, n):
        x = step_value(params.r, x)
        samples.append(OrbitSample(k=k, x=x))
    return Orbit(r=params.r, samples=samples)


# -- array forms -------------------------------------------------------------

def clamp_array(x: np.ndarray) -> np.ndarray:
    return np.minimum(np.maximum(x, EPSILON), UPPER)


def iterate_array(r: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        x = np.minimum(np.maximum((r * x) * (1.0 - x), EPSILON), UPPER)
    return x


def quantize_array(x: np.ndarray) -> np.ndarray:
    q = np.floor(x * QUANTIZATION_LEVELS).astype(np.int64)
    return np.clip(q, 0, QUANTIZATION_LEVELS - 1)


def perturb_array(x: np.ndarray, feedback) -> np.ndarray:
    """feedback may be a scalar byte or an integer array broadcastable to x."""
    offset = (np.asarray(feedback, dtype=np.float64) + 1.0) / float(FEEDBACK_DENOMINATOR)
    v = x + offset
    return clamp_array(v - np.floor(v))
