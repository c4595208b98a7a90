import io

import pytest
from pydantic import ValidationError

from conftest import make_key
from hmec.analysis import (
    AnalysisRequest,
    AnalysisTest,
    aggregate_rows,
    default_corpus,
    parse_tests,
    run_local,
)
from hmec.cipher import Mode
from hmec.cryptanalysis import Candidate, KeyGrid
from hmec.utilities.errors import AnalysisError, NonAsciiInputError
from hmec.utilities.reports import ReportRow, write_attack_csv, write_orbit_csv, write_report_csv

SMALL_GRID = KeyGrid(r_min=3.9, r_max=3.91, step=0.001)


def small_request(**kwargs) -> AnalysisRequest:
    key = make_key(r=3.905)
    options = dict(
        flips_per_text=3,
        identifiability_grid=SMALL_GRID,
        attack_grid=KeyGrid.around(key.r, 200, 1e-6),
        keyspace_grid=SMALL_GRID,
    )
    options.update(kwargs)
    return AnalysisRequest.build(key, [b"first corpus text", b"second corpus text"], ["a.txt", "b.txt"], **options)


def rows_for(rows, test, subject=None):
    return {r.metric: r.value for r in rows if r.test == test and (subject is None or r.subject == subject)}


def test_parse_tests():
    assert parse_tests("all") == list(AnalysisTest)
    assert parse_tests("kpa, keyspace,kpa") == [AnalysisTest.KPA, AnalysisTest.KEYSPACE]
    with pytest.raises(AnalysisError):
        parse_tests("kpa,differential")
    with pytest.raises(AnalysisError):
        parse_tests(" , ")


def test_default_corpus_is_printable_and_reproducible():
    corpus = default_corpus(count=3, length=64, seed=9)
    assert corpus == default_corpus(count=3, length=64, seed=9)
    assert all(len(text) == 64 and all(32 <= b < 127 for b in text) for text in corpus)


def test_request_survives_a_json_round_trip():
    request = small_request(tests=[AnalysisTest.KPA])
    assert AnalysisRequest.model_validate(request.model_dump(mode="json")) == request


def test_names_must_match_corpus():
    with pytest.raises(ValidationError):
        AnalysisRequest.build(make_key(), [b"one"], ["a", "b"])


def test_corpus_tests_need_a_corpus():
    request = AnalysisRequest(key=make_key(), tests=[AnalysisTest.SENSITIVITY])
    with pytest.raises(AnalysisError):
        run_local(request)


def test_keyspace_only():
    outcome = run_local(small_request(tests=[AnalysisTest.KEYSPACE]))
    assert [(r.test, r.subject, r.metric, r.value) for r in outcome.rows] == [("keyspace", "grid", "size", 11)]


def test_identifiability_without_corpus_uses_the_default_input():
    request = AnalysisRequest(key=make_key(), tests=[AnalysisTest.IDENTIFIABILITY], identifiability_grid=SMALL_GRID)
    values = rows_for(run_local(request).rows, "identifiability")
    assert values["points"] == 11
    assert values["identifiable"] == 1
    assert values["equivalent_pairs"] == 0


def test_full_local_run():
    outcome = run_local(small_request())
    rows = outcome.rows

    per_text = rows_for(rows, "sensitivity", "a.txt")
    assert set(per_text) == {"mean_percent", "tail_mean_percent", "min_percent", "max_percent"}
    assert set(rows_for(rows, "sensitivity", "all")) == {"mean_percent", "tail_mean_percent"}
    assert "percent" in rows_for(rows, "keysens", "b.txt")

    for subject in ("a.txt", "b.txt"):
        kpa = rows_for(rows, "kpa", subject)
        assert kpa["true_key_found"] == 1
        assert kpa["searched"] == 200
    assert rows_for(rows, "kpa", "all")["true_key_found"] == 1.0
    assert set(outcome.attacks) == {"a.txt", "b.txt"}

    order = [r.test for r in rows]
    assert order == sorted(order, key=["sensitivity", "keysens", "identifiability", "kpa", "keyspace"].index)


def test_corpus_rows_are_the_same_across_worker_pools():
    request = small_request(tests=[AnalysisTest.SENSITIVITY, AnalysisTest.KEYSENS])
    serial = run_local(request, workers=1)
    pooled = run_local(request, workers=2)
    assert pooled.rows == serial.rows
    assert {r.subject for r in pooled.rows} == {"a.txt", "b.txt", "all"}


def test_strict_run_with_non_ascii_text_fails():
    request = AnalysisRequest.build(make_key(), [b"caf\xc3\xa9"], mode=Mode.STRICT, tests=[AnalysisTest.KEYSENS])
    with pytest.raises(NonAsciiInputError):
        run_local(request)


def test_aggregate_rows_skip_extremes():
    rows = [
        ReportRow(test="sensitivity", subject="a", metric="mean_percent", value=40.0),
        ReportRow(test="sensitivity", subject="b", metric="mean_percent", value=50.0),
        ReportRow(test="sensitivity", subject="a", metric="max_percent", value=60.0),
        ReportRow(test="keyspace", subject="grid", metric="size", value=11),
    ]
    assert aggregate_rows(rows) == [ReportRow(test="sensitivity", subject="all", metric="mean_percent", value=45.0)]


def test_report_csv():
    stream = io.StringIO()
    write_report_csv([ReportRow(test="keyspace", subject="grid", metric="size", value=430_000_001)], stream)
    assert stream.getvalue() == "test,subject,metric,value\nkeyspace,grid,size,430000001\n"


def test_attack_csv():
    stream = io.StringIO()
    write_attack_csv([Candidate(r=3.9, matched_bytes=5), Candidate(r=3.900001, matched_bytes=5)], stream)
    assert stream.getvalue().splitlines() == ["rank,r,matched_bytes", "1,3.900000000,5", "2,3.900001000,5"]


def test_attack_csv_with_initial_states():
    stream = io.StringIO()
    write_attack_csv([Candidate(r=3.9, x0=0.5, matched_bytes=5)], stream, with_x0=True)
    assert stream.getvalue().splitlines() == ["rank,r,matched_bytes,x0", "1,3.900000000,5,0.5"]


def test_orbit_csv():
    stream = io.StringIO()
    write_orbit_csv([0.5, 0.25], stream)
    assert stream.getvalue().splitlines() == ["k,x", "0,0.5", "1,0.25"]
