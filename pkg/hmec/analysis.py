"""
Analysis suite: turns an AnalysisRequest into CSV report rows.

The per-test functions here are the units of work for both backends: the
local runner calls them directly (with the process-pool scans underneath),
and the Temporal activities wrap them one corpus entry or test at a time.
"""

import logging
import time
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from .cipher import CipherKey, Mode, PublicFields, encrypt
from .cryptanalysis import (
    DEFAULT_DELTA_R,
    DEFAULT_ITERATIONS,
    DEFAULT_PREFIX_LENGTH,
    AttackResult,
    InitialStateGrid,
    KeyGrid,
    identifiability_scan,
    key_sensitivity,
    key_space_size,
    known_plaintext_attack,
    plaintext_sensitivity,
    run_chunks,
    signed_delta,
    text_flips,
)
from .utilities.errors import AnalysisError
from .utilities.reports import ReportRow

logger = logging.getLogger(__name__)

IDENTIFIABILITY_PROBE = b"The quick brown fox jumps over the lazy dog. 0123456789"
DEFAULT_CORPUS_SIZE = 20
DEFAULT_TEXT_LENGTH = 1024
ATTACK_POINTS = 100_000
ATTACK_STEP = 1e-6


class AnalysisTest(str, Enum):
    SENSITIVITY = "sensitivity"
    KEYSENS = "keysens"
    IDENTIFIABILITY = "identifiability"
    KPA = "kpa"
    KEYSPACE = "keyspace"


TESTS = tuple(t.value for t in AnalysisTest)
CORPUS_TESTS = (AnalysisTest.SENSITIVITY, AnalysisTest.KEYSENS, AnalysisTest.KPA)


def default_identifiability_grid() -> KeyGrid:
    # 1001 points spanning the whole region
    return KeyGrid(r_min=3.57, r_max=4.0, step=0.00043)


def default_keyspace_grid() -> KeyGrid:
    return KeyGrid.full_region(step=1e-9)


def default_corpus(count: int = DEFAULT_CORPUS_SIZE, length: int = DEFAULT_TEXT_LENGTH, seed: int = 0) -> List[bytes]:
    """Printable-ASCII texts, so the corpus works in both embedding modes."""
    rng = np.random.default_rng(seed)
    return [rng.integers(32, 127, length, dtype=np.uint8).tobytes() for _ in range(count)]


class AnalysisRequest(BaseModel):
    """Everything an analysis run needs. JSON-safe so it can travel as a Temporal payload."""

    key: CipherKey
    mode: Mode = Mode.LENIENT
    tests: List[AnalysisTest] = Field(default_factory=lambda: list(AnalysisTest))
    corpus_hex: List[str] = Field(default_factory=list, description="Corpus entries, hex encoded")
    names: List[str] = Field(default_factory=list, description="One subject name per corpus entry")
    flips_per_text: int = Field(default=50, ge=0)
    delta_r: float = Field(default=DEFAULT_DELTA_R)
    seed: int = 0
    identifiability_grid: KeyGrid = Field(default_factory=default_identifiability_grid)
    iterations: int = Field(default=DEFAULT_ITERATIONS, ge=1)
    tolerance: float = Field(default=0.0, ge=0.0)
    attack_grid: Optional[KeyGrid] = Field(default=None, description="Defaults to a window around the key's r")
    prefix_length: int = Field(default=DEFAULT_PREFIX_LENGTH, ge=1)
    x0_grid: Optional[InitialStateGrid] = Field(default=None, description="Widen the attack to (r, x0)")
    keyspace_grid: KeyGrid = Field(default_factory=default_keyspace_grid)

    @model_validator(mode="after")
    def _consistent(self) -> "AnalysisRequest":
        if self.names and len(self.names) != len(self.corpus_hex):
            raise ValueError(f"{len(self.names)} names for {len(self.corpus_hex)} corpus entries")
        return self

    @classmethod
    def build(cls, key: CipherKey, corpus: List[bytes], names: Optional[List[str]] = None, **kwargs) -> "AnalysisRequest":
        return cls(key=key, corpus_hex=[t.hex() for t in corpus], names=list(names or []), **kwargs)

    def texts(self) -> List[bytes]:
        return [bytes.fromhex(h) for h in self.corpus_hex]

    def text(self, index: int) -> bytes:
        return bytes.fromhex(self.corpus_hex[index])

    def subject(self, index: int) -> str:
        return self.names[index] if self.names else f"text{index:02d}"

    def wants(self, test: AnalysisTest) -> bool:
        return test in self.tests

    def resolved_attack_grid(self) -> KeyGrid:
        return self.attack_grid or KeyGrid.around(self.key.r, ATTACK_POINTS, ATTACK_STEP)

    def validate_for_run(self) -> None:
        if not self.tests:
            raise AnalysisError("no analysis tests selected")
        needs_corpus = [t.value for t in CORPUS_TESTS if self.wants(t)]
        if needs_corpus and not self.corpus_hex:
            raise AnalysisError(f"tests {', '.join(needs_corpus)} need a non-empty corpus")
        for i, text in enumerate(self.corpus_hex):
            if not text:
                raise AnalysisError(f"corpus entry {self.subject(i)!r} is empty")


class AnalysisOutcome(BaseModel):
    rows: List[ReportRow] = Field(default_factory=list)
    attacks: Dict[str, AttackResult] = Field(default_factory=dict)


def parse_tests(spec: str) -> List[AnalysisTest]:
    """Comma separated test names, or 'all'."""
    names = [n.strip() for n in spec.split(",") if n.strip()]
    if names == ["all"]:
        return list(AnalysisTest)
    unknown = [n for n in names if n not in TESTS]
    if unknown:
        raise AnalysisError(f"unknown test(s) {', '.join(unknown)}; choose from {', '.join(TESTS)}")
    if not names:
        raise AnalysisError("no analysis tests selected")
    return [AnalysisTest(n) for n in dict.fromkeys(names)]


# -- per-test units ----------------------------------------------------------

def sensitivity_rows(request: AnalysisRequest, index: int) -> List[ReportRow]:
    subject, text = request.subject(index), request.text(index)
    flips = text_flips(text, index, request.flips_per_text, request.seed, request.mode)
    report = plaintext_sensitivity(request.key, text, flips, request.mode)
    if not report.samples:
        return []
    return [
        ReportRow(test="sensitivity", subject=subject, metric="mean_percent", value=report.mean),
        ReportRow(test="sensitivity", subject=subject, metric="tail_mean_percent", value=report.tail_mean),
        ReportRow(test="sensitivity", subject=subject, metric="min_percent", value=report.min),
        ReportRow(test="sensitivity", subject=subject, metric="max_percent", value=report.max),
    ]


def keysens_rows(request: AnalysisRequest, index: int) -> List[ReportRow]:
    subject, text = request.subject(index), request.text(index)
    report = key_sensitivity(request.key, text, signed_delta(request.key, request.delta_r), request.mode)
    return [ReportRow(test="keysens", subject=subject, metric="percent", value=report.mean)]


def corpus_rows(request: AnalysisRequest, index: int) -> List[ReportRow]:
    """Avalanche rows for one corpus entry."""
    rows: List[ReportRow] = []
    if request.wants(AnalysisTest.SENSITIVITY):
        rows.extend(sensitivity_rows(request, index))
    if request.wants(AnalysisTest.KEYSENS):
        rows.extend(keysens_rows(request, index))
    return rows


def identifiability_rows(request: AnalysisRequest, workers: int = 1, chunk_size: int = 262_144) -> List[ReportRow]:
    probe = request.text(0) if request.corpus_hex else IDENTIFIABILITY_PROBE
    started = time.perf_counter()
    report = identifiability_scan(
        request.key, probe, request.identifiability_grid,
        iterations=request.iterations, tolerance=request.tolerance, mode=request.mode,
        workers=workers, chunk_size=chunk_size,
    )
    elapsed = time.perf_counter() - started
    return [
        ReportRow(test="identifiability", subject="grid", metric="points", value=report.grid.count),
        ReportRow(test="identifiability", subject="grid", metric="equivalent_pairs", value=len(report.equivalent_pairs)),
        ReportRow(test="identifiability", subject="grid", metric="identifiable", value=int(report.identifiable)),
        ReportRow(test="identifiability", subject="grid", metric="elapsed_seconds", value=elapsed),
    ]


def attack_for_text(request: AnalysisRequest, index: int, workers: int = 1, chunk_size: int = 262_144) -> AttackResult:
    text = request.text(index)
    prefix = text[:request.prefix_length]
    ciphertext = encrypt(request.key, text, request.mode)
    return known_plaintext_attack(
        ciphertext, prefix, PublicFields.of(request.key), request.resolved_attack_grid(),
        mode=request.mode, x0_grid=request.x0_grid, workers=workers, chunk_size=chunk_size,
    )


def attack_rows(request: AnalysisRequest, index: int, result: AttackResult) -> List[ReportRow]:
    subject = request.subject(index)
    key = request.key
    found = int(any(c.r == key.r and (c.x0 is None or c.x0 == key.x0) for c in result.candidates))
    return [
        ReportRow(test="kpa", subject=subject, metric="searched", value=result.searched),
        ReportRow(test="kpa", subject=subject, metric="candidates", value=len(result.candidates)),
        ReportRow(test="kpa", subject=subject, metric="true_key_found", value=found),
        ReportRow(test="kpa", subject=subject, metric="spurious", value=len(result.candidates) - found),
        ReportRow(test="kpa", subject=subject, metric="elapsed_seconds", value=result.elapsed_seconds),
    ]


def keyspace_rows(request: AnalysisRequest) -> List[ReportRow]:
    return [ReportRow(test="keyspace", subject="grid", metric="size", value=key_space_size(request.keyspace_grid))]


def _mean(values: List[float]) -> float:
    return sum(values) / len(values)


def aggregate_rows(rows: List[ReportRow]) -> List[ReportRow]:
    """Corpus-wide means of the per-text rows, subject 'all'."""
    by_metric: Dict[Tuple[str, str], List[float]] = {}
    for row in rows:
        if row.test in ("sensitivity", "keysens", "kpa") and row.subject != "all":
            by_metric.setdefault((row.test, row.metric), []).append(float(row.value))

    out = []
    for (test, metric), values in by_metric.items():
        if metric in ("min_percent", "max_percent", "searched"):
            continue
        out.append(ReportRow(test=test, subject="all", metric=metric, value=_mean(values)))
    return out


def order_rows(rows: List[ReportRow]) -> List[ReportRow]:
    """Stable ordering: by test in TESTS order, per-text rows before the aggregates."""
    rank = {name: i for i, name in enumerate(TESTS)}
    return sorted(rows, key=lambda row: (rank.get(row.test, len(rank)), row.subject == "all"))


def run_local(request: AnalysisRequest, workers: int = 1, chunk_size: int = 262_144) -> AnalysisOutcome:
    """Run the requested tests here; corpus entries and grid chunks fan out over ``workers`` processes."""
    request.validate_for_run()
    outcome = AnalysisOutcome()
    count = len(request.corpus_hex)

    if request.wants(AnalysisTest.SENSITIVITY) or request.wants(AnalysisTest.KEYSENS):
        for rows in run_chunks(corpus_rows, [(request, index) for index in range(count)], workers):
            outcome.rows.extend(rows)
    if request.wants(AnalysisTest.IDENTIFIABILITY):
        outcome.rows.extend(identifiability_rows(request, workers, chunk_size))
    if request.wants(AnalysisTest.KPA):
        for index in range(count):
            result = attack_for_text(request, index, workers, chunk_size)
            outcome.attacks[request.subject(index)] = result
            outcome.rows.extend(attack_rows(request, index, result))
    if request.wants(AnalysisTest.KEYSPACE):
        outcome.rows.extend(keyspace_rows(request))

    outcome.rows = order_rows(outcome.rows + aggregate_rows(outcome.rows))
    logger.info("Analysis finished: %d report rows", len(outcome.rows))
    return outcome
