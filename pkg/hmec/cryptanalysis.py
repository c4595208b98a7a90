"""
Cryptanalysis battery for the cipher: avalanche (plaintext and key
sensitivity), output-equality identifiability, known-plaintext key search and
key-space accounting.

Grid scans split the grid into contiguous index chunks; each chunk builds its
own GridEngine, so chunks can run in separate processes (or as separate
Temporal activities) and be merged afterwards.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from decimal import Decimal
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, model_validator

from .chaos import CHAOTIC_R_MAX, CHAOTIC_R_MIN
from .cipher import R_SCALE, CipherKey, Mode, PublicFields, embed, encrypt, normalize_r, symbol_offset
from .sweep import GridEngine
from .utilities.errors import AnalysisError, ChaoticRegionError, GridError, MalformedCiphertextError

logger = logging.getLogger(__name__)

R_MIN_NANOS = round(CHAOTIC_R_MIN * R_SCALE)
R_MAX_NANOS = round(CHAOTIC_R_MAX * R_SCALE)

DEFAULT_DELTA_R = 1e-9
DEFAULT_ITERATIONS = 64
DEFAULT_PREFIX_LENGTH = 5


def _decimal(value: float) -> Decimal:
    return Decimal(repr(float(value)))


# -- grids -------------------------------------------------------------------

class KeyGrid(BaseModel):
    """Evenly spaced r values r_min, r_min + step, ... not exceeding r_max."""
    model_config = ConfigDict(frozen=True)

    r_min: float = Field(description="First grid point")
    r_max: float = Field(description="Upper bound (inclusive)")
    step: float = Field(gt=0.0, description="Spacing between grid points")

    @model_validator(mode="before")
    @classmethod
    def _snap(cls, data):
        if isinstance(data, dict):
            data = dict(data)
            for name in ("r_min", "r_max"):
                if name in data and data[name] is not None:
                    data[name] = normalize_r(float(data[name]))
        return data

    @model_validator(mode="after")
    def _inside_region(self) -> "KeyGrid":
        if not CHAOTIC_R_MIN <= self.r_min <= self.r_max <= CHAOTIC_R_MAX:
            raise ValueError(
                f"grid [{self.r_min}, {self.r_max}] must satisfy "
                f"{CHAOTIC_R_MIN} <= r_min <= r_max <= {CHAOTIC_R_MAX}"
            )
        return self

    @classmethod
    def full_region(cls, step: float = 1e-9) -> "KeyGrid":
        return cls(r_min=CHAOTIC_R_MIN, r_max=CHAOTIC_R_MAX, step=step)

    @classmethod
    def around(cls, r: float, points: int, step: float) -> "KeyGrid":
        """Window of up to ``points`` grid points that contains r, clipped to the chaotic region."""
        step_nanos = _decimal(step) * R_SCALE
        if step_nanos != step_nanos.to_integral_value() or step_nanos < 1:
            raise GridError(f"step {step} is not a multiple of the 1e-9 key precision")
        step_nanos = int(step_nanos)
        if points < 1:
            raise GridError(f"grid needs at least one point, got {points}")
        try:
            center = round(normalize_r(r) * R_SCALE)
        except ValueError as e:
            raise ChaoticRegionError(f"r={r} is outside the chaotic region") from e
        if not R_MIN_NANOS <= center <= R_MAX_NANOS:
            raise ChaoticRegionError(f"r={r} is outside the chaotic region")

        room_below = (center - R_MIN_NANOS) // step_nanos
        room_above = (R_MAX_NANOS - center) // step_nanos
        below = min(points // 2, room_below)
        above = min(points - 1 - below, room_above)
        below = min(points - 1 - above, room_below)
        return cls(
            r_min=(center - below * step_nanos) / R_SCALE,
            r_max=(center + above * step_nanos) / R_SCALE,
            step=step_nanos / R_SCALE,
        )

    @property
    def count(self) -> int:
        return int((_decimal(self.r_max) - _decimal(self.r_min)) / _decimal(self.step)) + 1

    def points(self, start: int = 0, stop: Optional[int] = None) -> np.ndarray:
        """Canonical r values for grid indices [start, stop)."""
        stop = self.count if stop is None else min(stop, self.count)
        index = np.arange(start, stop, dtype=np.int64)
        step_nanos = _decimal(self.step) * R_SCALE
        min_nanos = round(self.r_min * R_SCALE)
        if step_nanos == step_nanos.to_integral_value():
            nanos = min_nanos + index * int(step_nanos)
        else:
            nanos = np.rint((self.r_min + index * self.step) * R_SCALE).astype(np.int64)
        nanos = np.minimum(nanos, round(self.r_max * R_SCALE))
        return nanos.astype(np.float64) / R_SCALE

    def chunks(self, size: int) -> List[Tuple[int, int]]:
        if size < 1:
            raise GridError(f"chunk size must be positive, got {size}")
        total = self.count
        return [(start, min(start + size, total)) for start in range(0, total, size)]


class InitialStateGrid(BaseModel):
    """x0 values for the widened (r, x0) attack."""
    model_config = ConfigDict(frozen=True)

    x_min: float = Field(gt=0.0, lt=1.0)
    x_max: float = Field(gt=0.0, lt=1.0)
    step: float = Field(gt=0.0)

    @model_validator(mode="after")
    def _ordered(self) -> "InitialStateGrid":
        if self.x_min > self.x_max:
            raise ValueError(f"x_min {self.x_min} exceeds x_max {self.x_max}")
        return self

    @property
    def count(self) -> int:
        return int((_decimal(self.x_max) - _decimal(self.x_min)) / _decimal(self.step)) + 1

    def points(self) -> np.ndarray:
        values = self.x_min + np.arange(self.count, dtype=np.float64) * self.step
        return np.minimum(values, self.x_max)


def key_space_size(grid: KeyGrid) -> int:
    return grid.count


# -- parallel plumbing ---------------------------------------------------------

def run_chunks(fn: Callable, jobs: Sequence[tuple], workers: int = 1) -> list:
    """Run fn(*job) for every job, in a process pool when it helps. Order is preserved."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [future.result() for future in futures]


# -- avalanche -----------------------------------------------------------------

def bit_change_percent(a: bytes, b: bytes) -> float:
    """Percentage of differing bits between two equal-length octet strings."""
    if len(a) != len(b):
        raise AnalysisError(f"length mismatch: {len(a)} vs {len(b)} bytes")
    if not a:
        return 0.0
    diff = np.bitwise_xor(np.frombuffer(a, dtype=np.uint8), np.frombuffer(b, dtype=np.uint8))
    return 100.0 * int(np.unpackbits(diff).sum()) / (8 * len(a))


class SensitivityKind(str, Enum):
    PLAINTEXT = "plaintext"
    KEY = "key"


class SensitivitySample(BaseModel):
    trial: int
    percent: float = Field(ge=0.0, le=100.0, description="Bit change over the whole ciphertext")
    tail_percent: Optional[float] = Field(
        default=None, ge=0.0, le=100.0,
        description="Bit change over the ciphertext from the first affected byte on",
    )


class SensitivityReport(BaseModel):
    kind: SensitivityKind
    samples: List[SensitivitySample] = Field(default_factory=list)

    @computed_field
    @property
    def mean(self) -> Optional[float]:
        return float(np.mean([s.percent for s in self.samples])) if self.samples else None

    @computed_field
    @property
    def min(self) -> Optional[float]:
        return min(s.percent for s in self.samples) if self.samples else None

    @computed_field
    @property
    def max(self) -> Optional[float]:
        return max(s.percent for s in self.samples) if self.samples else None

    @computed_field
    @property
    def tail_mean(self) -> Optional[float]:
        tails = [s.tail_percent for s in self.samples if s.tail_percent is not None]
        return float(np.mean(tails)) if tails else None


def flip_bit(data: bytes, position: int) -> bytes:
    """Flip bit ``position`` counted MSB-first from the start of data."""
    flipped = bytearray(data)
    flipped[position // 8] ^= 0x80 >> (position % 8)
    return bytes(flipped)


def plaintext_sensitivity(
    key: CipherKey,
    plaintext: bytes,
    flips: Sequence[int],
    mode: Mode = Mode.LENIENT,
) -> SensitivityReport:
    limit = 8 * len(plaintext)
    for position in flips:
        if not 0 <= position < limit:
            raise AnalysisError(f"bit position {position} outside [0, {limit})")

    report = SensitivityReport(kind=SensitivityKind.PLAINTEXT)
    if not flips:
        return report

    base = encrypt(key, plaintext, mode)
    for trial, position in enumerate(flips):
        changed = encrypt(key, flip_bit(plaintext, position), mode)
        start = symbol_offset(position // 8, mode)
        report.samples.append(SensitivitySample(
            trial=trial,
            percent=bit_change_percent(base, changed),
            tail_percent=bit_change_percent(base[start:], changed[start:]),
        ))
    return report


def key_sensitivity(
    key: CipherKey,
    plaintext: bytes,
    delta_r: float = DEFAULT_DELTA_R,
    mode: Mode = Mode.LENIENT,
) -> SensitivityReport:
    r = normalize_r(key.r + delta_r)
    if not CHAOTIC_R_MIN <= r <= CHAOTIC_R_MAX:
        raise ChaoticRegionError(f"r + delta_r = {r} leaves the chaotic region")
    base = encrypt(key, plaintext, mode)
    changed = encrypt(key.with_r(r), plaintext, mode)
    return SensitivityReport(
        kind=SensitivityKind.KEY,
        samples=[SensitivitySample(trial=0, percent=bit_change_percent(base, changed))],
    )


class AvalancheRow(BaseModel):
    subject: str
    plaintext: SensitivityReport
    key: SensitivityReport


class AvalancheReport(BaseModel):
    rows: List[AvalancheRow]

    @computed_field
    @property
    def plaintext_mean(self) -> float:
        return float(np.mean([m for row in self.rows for m in [row.plaintext.mean] if m is not None] or [0.0]))

    @computed_field
    @property
    def plaintext_tail_mean(self) -> float:
        return float(np.mean([m for row in self.rows for m in [row.plaintext.tail_mean] if m is not None] or [0.0]))

    @computed_field
    @property
    def key_mean(self) -> float:
        return float(np.mean([row.key.mean for row in self.rows]))


def random_flips(text: bytes, count: int, rng: np.random.Generator, mode: Mode = Mode.LENIENT) -> List[int]:
    """Uniform bit positions; strict mode avoids the MSB so the text stays ASCII."""
    if Mode(mode) is Mode.STRICT:
        byte = rng.integers(0, len(text), count)
        bit = rng.integers(1, 8, count)
        return [int(p) for p in byte * 8 + bit]
    return [int(p) for p in rng.integers(0, 8 * len(text), count)]


def text_flips(text: bytes, index: int, count: int, seed: int = 0, mode: Mode = Mode.LENIENT) -> List[int]:
    """Flip positions for corpus entry ``index``; reproducible from (seed, index)."""
    return random_flips(text, count, np.random.default_rng([seed, index]), mode)


def signed_delta(key: CipherKey, delta_r: float) -> float:
    """One grid step up, or down when that would leave the region."""
    return delta_r if key.r + delta_r <= CHAOTIC_R_MAX else -delta_r


def avalanche_for_text(
    key: CipherKey,
    subject: str,
    text: bytes,
    index: int,
    flips_per_text: int = 50,
    delta_r: float = DEFAULT_DELTA_R,
    seed: int = 0,
    mode: Mode = Mode.LENIENT,
) -> AvalancheRow:
    """One corpus entry of the avalanche suite."""
    if not text:
        raise AnalysisError(f"corpus entry {subject!r} is empty")
    return AvalancheRow(
        subject=subject,
        plaintext=plaintext_sensitivity(key, text, text_flips(text, index, flips_per_text, seed, mode), mode),
        key=key_sensitivity(key, text, signed_delta(key, delta_r), mode),
    )


def avalanche_suite(
    key: CipherKey,
    corpus: Sequence[bytes],
    flips_per_text: int = 50,
    delta_r: float = DEFAULT_DELTA_R,
    seed: int = 0,
    mode: Mode = Mode.LENIENT,
    names: Optional[Sequence[str]] = None,
    workers: int = 1,
) -> AvalancheReport:
    if not corpus:
        raise AnalysisError("avalanche suite needs a non-empty corpus")
    names = list(names) if names is not None else [f"text{i:02d}" for i in range(len(corpus))]
    if len(names) != len(corpus):
        raise AnalysisError(f"{len(names)} names for {len(corpus)} corpus entries")

    jobs = [(key, names[i], text, i, flips_per_text, delta_r, seed, mode) for i, text in enumerate(corpus)]
    rows = run_chunks(avalanche_for_text, jobs, workers)
    report = AvalancheReport(rows=rows)
    logger.info(
        "Avalanche over %d texts: plaintext %.2f%% (tail %.2f%%), key %.2f%%",
        len(rows), report.plaintext_mean, report.plaintext_tail_mean, report.key_mean,
    )
    return report


# -- identifiability -----------------------------------------------------------

class IdentifiabilityReport(BaseModel):
    grid: KeyGrid
    iterations: int
    tolerance: float
    equivalent_pairs: List[Tuple[float, float]] = Field(default_factory=list)
    degenerate: bool = Field(default=False, description="Grid has a single point")

    @computed_field
    @property
    def identifiable(self) -> bool:
        return not self.equivalent_pairs


def _identifiability_input(data: bytes, iterations: int, mode: Mode) -> List[int]:
    """Embedded symbols of ``data`` repeated cyclically until ``iterations`` are available."""
    per_byte = 2 if Mode(mode) is Mode.LENIENT else 1
    needed = -(-iterations // per_byte)
    repeated = (data * (-(-needed // len(data))))[:needed]
    return embed(repeated, mode)


def sweep_outputs_chunk(
    base: CipherKey,
    symbols: Sequence[int],
    grid: KeyGrid,
    start: int,
    stop: int,
    iterations: int,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    r = grid.points(start, stop)
    engine = GridEngine(r, PublicFields.of(base))
    output = engine.encrypt(symbols)
    return r, output.ciphertext[:, :iterations], output.states[:, :iterations]


def _pairs_exact(r: np.ndarray, outputs: np.ndarray) -> List[Tuple[float, float]]:
    buckets: Dict[bytes, List[int]] = {}
    for i in range(len(r)):
        buckets.setdefault(outputs[i].tobytes(), []).append(i)
    pairs = []
    for members in buckets.values():
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                ra, rb = float(r[members[a]]), float(r[members[b]])
                pairs.append((min(ra, rb), max(ra, rb)))
    return pairs


def _pairs_within(r: np.ndarray, states: np.ndarray, tolerance: float) -> List[Tuple[float, float]]:
    order = np.argsort(states[:, 0], kind="stable")
    first = states[order, 0]
    pairs = []
    for i in range(len(order)):
        j = i + 1
        while j < len(order) and first[j] - first[i] <= tolerance:
            a, b = order[i], order[j]
            if np.all(np.abs(states[a] - states[b]) <= tolerance):
                ra, rb = float(r[a]), float(r[b])
                pairs.append((min(ra, rb), max(ra, rb)))
            j += 1
    return pairs


def identifiability_scan(
    base: CipherKey,
    input: bytes,
    grid: KeyGrid,
    iterations: int = DEFAULT_ITERATIONS,
    tolerance: float = 0.0,
    mode: Mode = Mode.LENIENT,
    workers: int = 1,
    chunk_size: int = 262_144,
) -> IdentifiabilityReport:
    """
    Output-equality scan: every grid r (other key fields from ``base``) encrypts
    the same input; two r values are equivalent when their first ``iterations``
    ciphertext bytes agree (tolerance 0) or their mixing states agree within
    ``tolerance`` at every position.
    """
    if not input:
        raise AnalysisError("identifiability scan needs a non-empty input")
    if iterations < 1:
        raise AnalysisError(f"iterations must be positive, got {iterations}")
    if tolerance < 0:
        raise AnalysisError(f"tolerance must be non-negative, got {tolerance}")

    symbols = _identifiability_input(input, iterations, mode)
    jobs = [(base, symbols, grid, start, stop, iterations) for start, stop in grid.chunks(chunk_size)]
    parts = run_chunks(sweep_outputs_chunk, jobs, workers)
    r = np.concatenate([p[0] for p in parts])
    outputs = np.concatenate([p[1] for p in parts])
    states = np.concatenate([p[2] for p in parts])

    pairs = _pairs_exact(r, outputs) if tolerance == 0 else _pairs_within(r, states, tolerance)
    pairs.sort()
    if grid.count == 1:
        logger.warning("Identifiability grid has a single point; the result is trivially identifiable")
    logger.info("Identifiability over %d points: %d equivalent pairs", grid.count, len(pairs))
    return IdentifiabilityReport(
        grid=grid,
        iterations=iterations,
        tolerance=tolerance,
        equivalent_pairs=pairs,
        degenerate=grid.count == 1,
    )


# -- known-plaintext attack ------------------------------------------------------

class Candidate(BaseModel):
    r: float
    x0: Optional[float] = None
    matched_bytes: int


class AttackResult(BaseModel):
    grid: KeyGrid
    candidates: List[Candidate] = Field(default_factory=list)
    searched: int
    elapsed_seconds: float
    prefix_length: int

    def candidate_rs(self) -> List[float]:
        return [c.r for c in self.candidates]


def attack_targets(known_prefix: bytes, mode: Mode) -> Tuple[List[int], int]:
    """Embedded symbols of the prefix (pad excluded) and the ciphertext bytes needed to test them."""
    if not known_prefix:
        raise AnalysisError("known-plaintext attack needs at least one known byte")
    symbols = embed(known_prefix, mode)
    known = 2 * len(known_prefix) if Mode(mode) is Mode.LENIENT else len(known_prefix)
    return symbols[:known], len(symbols)


def scan_attack_chunk(
    ciphertext: bytes,
    expected: Sequence[int],
    public: PublicFields,
    grid: KeyGrid,
    start: int,
    stop: int,
    x0_values: Optional[Sequence[float]] = None,
    prefix_length: int = 0,
) -> List[Candidate]:
    """Trial-decrypt under grid indices [start, stop) (times every x0 when given)."""
    r = grid.points(start, stop)
    x0 = None
    if x0_values is not None:
        x0_array = np.asarray(x0_values, dtype=np.float64)
        x0 = np.tile(x0_array, len(r))
        r = np.repeat(r, len(x0_array))

    engine = GridEngine(r, public, x0=x0)
    symbols = engine.decrypt_symbols(ciphertext)
    target = np.asarray(expected, dtype=np.int64)
    hits = np.flatnonzero(np.all(symbols[:, :len(target)] == target, axis=1))
    logger.debug("Attack chunk [%d, %d): %d hits", start, stop, len(hits))
    return [
        Candidate(r=float(r[i]), x0=None if x0 is None else float(x0[i]), matched_bytes=prefix_length)
        for i in hits
    ]


def known_plaintext_attack(
    ciphertext: bytes,
    known_prefix: bytes,
    public_fields: PublicFields,
    grid: KeyGrid,
    mode: Mode = Mode.LENIENT,
    x0_grid: Optional[InitialStateGrid] = None,
    workers: int = 1,
    chunk_size: int = 262_144,
) -> AttackResult:
    """
    Exhaustive search for r: decrypt the ciphertext prefix under every grid
    point and keep those reproducing ``known_prefix``. With ``x0_grid`` the
    search also spans x0 (quadratic cost).
    """
    started = time.perf_counter()
    expected, needed = attack_targets(known_prefix, mode)
    if len(ciphertext) < needed:
        raise MalformedCiphertextError(
            f"ciphertext has {len(ciphertext)} bytes, the known prefix needs {needed}"
        )
    head = bytes(ciphertext[:needed])

    x0_values = None if x0_grid is None else [float(v) for v in x0_grid.points()]
    per_r = 1 if x0_values is None else len(x0_values)
    r_chunk = max(1, chunk_size // per_r)
    jobs = [
        (head, expected, public_fields, grid, start, stop, x0_values, len(known_prefix))
        for start, stop in grid.chunks(r_chunk)
    ]
    candidates = [c for part in run_chunks(scan_attack_chunk, jobs, workers) for c in part]
    candidates.sort(key=lambda c: (c.r, c.x0 if c.x0 is not None else 0.0))

    elapsed = time.perf_counter() - started
    logger.info(
        "Known-plaintext search over %d keys in %d chunks: %d candidates in %.3fs",
        grid.count * per_r, len(jobs), len(candidates), elapsed,
    )
    return AttackResult(
        grid=grid,
        candidates=candidates,
        searched=grid.count * per_r,
        elapsed_seconds=elapsed,
        prefix_length=len(known_prefix),
    )


__all__ = [
    "AttackResult",
    "AvalancheReport",
    "AvalancheRow",
    "Candidate",
    "IdentifiabilityReport",
    "InitialStateGrid",
    "KeyGrid",
    "SensitivityKind",
    "SensitivityReport",
    "SensitivitySample",
    "avalanche_for_text",
    "avalanche_suite",
    "bit_change_percent",
    "flip_bit",
    "identifiability_scan",
    "key_sensitivity",
    "key_space_size",
    "known_plaintext_attack",
    "plaintext_sensitivity",
    "random_flips",
    "run_chunks",
    "scan_attack_chunk",
    "signed_delta",
    "text_flips",
]
