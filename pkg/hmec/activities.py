from typing import Any, Dict, List

from temporalio import activity
from temporalio.exceptions import ApplicationError

from .analysis import (
    AnalysisRequest,
    attack_for_text,
    attack_rows,
    corpus_rows,
    identifiability_rows,
    keyspace_rows,
)
from .utilities.errors import HmecError
from .utilities.settings import get_settings


# ============================================================================
# ANALYSIS ACTIVITIES
# ============================================================================
# Synchronous activities: they are CPU bound and run on the worker's thread
# pool. Payloads are AnalysisRequest dumps (JSON), results are report rows as
# dicts. Domain errors are deterministic, so they are reported non-retryable;
# anything else is left to the workflow's retry policy.
# ============================================================================


def _request(payload: Dict[str, Any]) -> AnalysisRequest:
    try:
        return AnalysisRequest.model_validate(payload["request"])
    except (KeyError, ValueError) as e:
        raise ApplicationError(
            f"Invalid analysis request: {e}",
            type="AnalysisError",
            non_retryable=True,
        )


def _domain_failure(what: str, e: HmecError) -> ApplicationError:
    return ApplicationError(f"{what} failed: {e}", type=e.error_type, non_retryable=True)


def _dump(rows) -> List[Dict[str, Any]]:
    return [row.model_dump() for row in rows]


@activity.defn
def analyze_corpus_entry(payload: Dict[str, Any]) -> List[Dict[str, Any]]:
    """Plaintext and key sensitivity rows for corpus entry ``payload['index']``."""
    request = _request(payload)
    index = payload["index"]
    try:
        rows = corpus_rows(request, index)
    except HmecError as e:
        raise _domain_failure(f"Sensitivity analysis of {request.subject(index)}", e)
    activity.logger.info(f"Corpus entry {request.subject(index)}: {len(rows)} rows")
    return _dump(rows)


@activity.defn
def analyze_identifiability(payload: Dict[str, Any]) -> List[Dict[str, Any]]:
    request = _request(payload)
    settings = get_settings()
    try:
        rows = identifiability_rows(request, workers=1, chunk_size=settings.chunk_size)
    except HmecError as e:
        raise _domain_failure("Identifiability scan", e)
    activity.logger.info(f"Identifiability over {request.identifiability_grid.count} grid points done")
    return _dump(rows)


@activity.defn
def attack_corpus_entry(payload: Dict[str, Any]) -> Dict[str, Any]:
    """Known-plaintext search against the encryption of corpus entry ``payload['index']``."""
    request = _request(payload)
    index = payload["index"]
    settings = get_settings()
    try:
        result = attack_for_text(request, index, workers=1, chunk_size=settings.chunk_size)
    except HmecError as e:
        raise _domain_failure(f"Known-plaintext attack on {request.subject(index)}", e)
    activity.logger.info(
        f"Attack on {request.subject(index)}: {len(result.candidates)} candidates "
        f"out of {result.searched} keys in {result.elapsed_seconds:.2f}s"
    )
    return {
        "subject": request.subject(index),
        "rows": _dump(attack_rows(request, index, result)),
        "result": result.model_dump(mode="json"),
    }


@activity.defn
def count_key_space(payload: Dict[str, Any]) -> List[Dict[str, Any]]:
    request = _request(payload)
    return _dump(keyspace_rows(request))


ACTIVITIES = [analyze_corpus_entry, analyze_identifiability, attack_corpus_entry, count_key_space]
