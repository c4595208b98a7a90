import pytest
from temporalio.exceptions import ApplicationError
from temporalio.testing import ActivityEnvironment

from conftest import make_key
from hmec import activities
from hmec.analysis import AnalysisRequest, AnalysisTest, corpus_rows
from hmec.cipher import Mode
from hmec.cryptanalysis import KeyGrid

GRID = KeyGrid(r_min=3.8, r_max=3.81, step=0.001)


def payload(request: AnalysisRequest, **extra):
    return {"request": request.model_dump(mode="json"), **extra}


def request_for(*tests, corpus=(b"activity corpus text",), **kwargs) -> AnalysisRequest:
    key = make_key(r=3.805)
    options = dict(
        tests=list(tests),
        flips_per_text=2,
        identifiability_grid=GRID,
        keyspace_grid=GRID,
        attack_grid=KeyGrid.around(key.r, 100, 1e-6),
    )
    options.update(kwargs)
    return AnalysisRequest.build(key, list(corpus), **options)


def test_count_key_space():
    rows = ActivityEnvironment().run(activities.count_key_space, payload(request_for(AnalysisTest.KEYSPACE)))
    assert rows == [{"test": "keyspace", "subject": "grid", "metric": "size", "value": 11}]


def test_corpus_entry_matches_local_rows():
    request = request_for(AnalysisTest.SENSITIVITY, AnalysisTest.KEYSENS)
    rows = ActivityEnvironment().run(activities.analyze_corpus_entry, payload(request, index=0))
    assert rows == [row.model_dump() for row in corpus_rows(request, 0)]


def test_identifiability_activity():
    rows = ActivityEnvironment().run(
        activities.analyze_identifiability, payload(request_for(AnalysisTest.IDENTIFIABILITY))
    )
    values = {row["metric"]: row["value"] for row in rows}
    assert values["points"] == 11
    assert values["identifiable"] == 1


def test_attack_activity():
    request = request_for(AnalysisTest.KPA)
    result = ActivityEnvironment().run(activities.attack_corpus_entry, payload(request, index=0))
    assert result["subject"] == "text00"
    metrics = {row["metric"]: row["value"] for row in result["rows"]}
    assert metrics["true_key_found"] == 1
    assert request.key.r in [c["r"] for c in result["result"]["candidates"]]


def test_domain_errors_are_not_retried():
    request = request_for(AnalysisTest.KEYSENS, corpus=(b"caf\xc3\xa9",), mode=Mode.STRICT)
    with pytest.raises(ApplicationError) as info:
        ActivityEnvironment().run(activities.analyze_corpus_entry, payload(request, index=0))
    assert info.value.type == "NonAsciiInput"
    assert info.value.non_retryable


def test_invalid_payload_is_not_retried():
    with pytest.raises(ApplicationError) as info:
        ActivityEnvironment().run(activities.count_key_space, {"request": {"tests": ["keyspace"]}})
    assert info.value.type == "AnalysisError"
    assert info.value.non_retryable
