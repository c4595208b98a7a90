import csv

import pytest

from conftest import make_key
from hmec.cipher import Mode
from hmec.main import (
    EXIT_ANALYSIS,
    EXIT_IO,
    EXIT_KEY,
    EXIT_MALFORMED,
    EXIT_NON_ASCII,
    EXIT_OK,
    EXIT_REGION,
    EXIT_USAGE,
    main,
)
from hmec.utilities.container import HEADER
from hmec.utilities.keyfile import KeyFile, load_key, parse_key_text, save_key

PLAINTEXT = "".join(f"line {i:02d}: the quick brown fox jumps over the lazy dog\n" for i in range(28)).encode()


@pytest.fixture
def key_path(tmp_path):
    path = tmp_path / "key.txt"
    save_key(KeyFile(key=make_key(), mode=Mode.LENIENT), path)
    return path


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as stream:
        return list(csv.reader(stream))


def test_keygen_writes_a_loadable_key(tmp_path):
    path = tmp_path / "generated.txt"
    assert main(["keygen", "--out", str(path), "--mode", "strict"]) == EXIT_OK
    keyfile = load_key(path)
    assert keyfile.mode is Mode.STRICT
    assert 3.57 <= keyfile.key.r <= 4.0


def test_encrypt_decrypt_round_trip(tmp_path, key_path):
    plain, sealed, opened = tmp_path / "plain.txt", tmp_path / "cipher.hmec", tmp_path / "opened.txt"
    plain.write_bytes(PLAINTEXT)

    assert main(["encrypt", "--key", str(key_path), "--in", str(plain), "--out", str(sealed)]) == EXIT_OK
    assert main(["decrypt", "--key", str(key_path), "--in", str(sealed), "--out", str(opened)]) == EXIT_OK

    assert opened.read_bytes() == PLAINTEXT
    assert sealed.read_bytes()[:4] == b"HMEC"
    assert len(sealed.read_bytes()) == HEADER.size + 2 * len(PLAINTEXT)


def test_encryption_is_deterministic(tmp_path, key_path):
    plain = tmp_path / "plain.txt"
    plain.write_bytes(PLAINTEXT)
    outputs = []
    for name in ("one.hmec", "two.hmec"):
        out = tmp_path / name
        assert main(["encrypt", "--key", str(key_path), "--in", str(plain), "--out", str(out)]) == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_strict_mode_round_trip_keeps_odd_length(tmp_path, key_path):
    plain, sealed, opened = tmp_path / "plain.txt", tmp_path / "cipher.hmec", tmp_path / "opened.txt"
    plain.write_bytes(b"odd")
    assert main(["encrypt", "--key", str(key_path), "--in", str(plain), "--out", str(sealed), "--mode", "strict"]) == EXIT_OK
    assert main(["decrypt", "--key", str(key_path), "--in", str(sealed), "--out", str(opened)]) == EXIT_OK
    assert opened.read_bytes() == b"odd"


def test_empty_file_gives_a_bare_header(tmp_path, key_path):
    plain, sealed, opened = tmp_path / "empty", tmp_path / "empty.hmec", tmp_path / "opened"
    plain.write_bytes(b"")
    assert main(["encrypt", "--key", str(key_path), "--in", str(plain), "--out", str(sealed)]) == EXIT_OK
    assert len(sealed.read_bytes()) == HEADER.size
    assert main(["decrypt", "--key", str(key_path), "--in", str(sealed), "--out", str(opened)]) == EXIT_OK
    assert opened.read_bytes() == b""


def test_truncated_container(tmp_path, key_path):
    plain, sealed = tmp_path / "plain.txt", tmp_path / "cipher.hmec"
    plain.write_bytes(PLAINTEXT)
    main(["encrypt", "--key", str(key_path), "--in", str(plain), "--out", str(sealed)])
    sealed.write_bytes(sealed.read_bytes()[:-1])
    assert main(["decrypt", "--key", str(key_path), "--in", str(sealed), "--out", str(tmp_path / "x")]) == EXIT_MALFORMED


def test_bad_key_file(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("r = 3.9\nx0 = 0.5\n", encoding="utf-8")
    plain = tmp_path / "plain.txt"
    plain.write_bytes(b"hello")
    assert main(["encrypt", "--key", str(bad), "--in", str(plain), "--out", str(tmp_path / "c")]) == EXIT_KEY


def test_even_determinant_key_is_rejected(tmp_path):
    bad = tmp_path / "even.txt"
    bad.write_text(
        "r = 3.9\nx0 = 0.5\nn1 = 3\nn2 = 4\nk_row0 = 2 4\nk_row1 = 6 8\nmode = lenient\n", encoding="utf-8"
    )
    plain = tmp_path / "plain.txt"
    plain.write_bytes(b"hello")
    assert main(["encrypt", "--key", str(bad), "--in", str(plain), "--out", str(tmp_path / "c")]) == EXIT_KEY


def test_missing_input_file(tmp_path, key_path):
    missing = tmp_path / "nowhere.txt"
    assert main(["encrypt", "--key", str(key_path), "--in", str(missing), "--out", str(tmp_path / "c")]) == EXIT_IO


def test_strict_mode_rejects_non_ascii(tmp_path, key_path):
    plain = tmp_path / "plain.bin"
    plain.write_bytes("naïve".encode("utf-8"))
    code = main(["encrypt", "--key", str(key_path), "--in", str(plain), "--out", str(tmp_path / "c"), "--mode", "strict"])
    assert code == EXIT_NON_ASCII


def test_orbit_csv(tmp_path):
    out = tmp_path / "orbit.csv"
    assert main(["orbit", "--r", "3.57", "--x0", "0.99", "--n", "1000", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == ["k", "x"]
    assert len(rows) == 1001
    assert rows[1][0] == "0" and float(rows[1][1]) == 0.99
    assert all(0.0 <= float(x) <= 1.0 for _, x in rows[1:])


def test_orbit_outside_the_chaotic_region(tmp_path):
    out = tmp_path / "orbit.csv"
    assert main(["orbit", "--r", "3.0", "--x0", "0.5", "--n", "10", "--out", str(out)]) == EXIT_REGION
    assert main(["orbit", "--r", "3.0", "--x0", "0.5", "--n", "10", "--out", str(out), "--override-region"]) == EXIT_OK
    assert len(read_csv(out)) == 11


def test_analyze_keyspace(tmp_path, key_path):
    out = tmp_path / "report.csv"
    assert main(["analyze", "--key", str(key_path), "--tests", "keyspace", "--out", str(out)]) == EXIT_OK
    rows = read_csv(out)
    assert rows[0] == ["test", "subject", "metric", "value"]
    assert ["keyspace", "grid", "size", "430000001"] in rows


def test_analyze_unknown_test(tmp_path, key_path):
    code = main(["analyze", "--key", str(key_path), "--tests", "differential", "--out", str(tmp_path / "r.csv")])
    assert code == EXIT_ANALYSIS


def test_analyze_missing_corpus(tmp_path, key_path):
    code = main([
        "analyze", "--key", str(key_path), "--corpus", str(tmp_path / "absent"),
        "--tests", "sensitivity", "--out", str(tmp_path / "r.csv"),
    ])
    assert code == EXIT_IO


def test_analyze_empty_corpus(tmp_path, key_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    code = main([
        "analyze", "--key", str(key_path), "--corpus", str(corpus),
        "--tests", "sensitivity", "--out", str(tmp_path / "r.csv"),
    ])
    assert code == EXIT_ANALYSIS


def test_analyze_inverted_grid(tmp_path, key_path):
    code = main([
        "analyze", "--key", str(key_path), "--tests", "keyspace",
        "--grid-min", "3.9", "--grid-max", "3.8", "--grid-step", "0.001",
        "--out", str(tmp_path / "r.csv"),
    ])
    assert code == EXIT_REGION


def test_analyze_sensitivity_on_a_small_corpus(tmp_path, key_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "a.txt").write_bytes(PLAINTEXT[:256])
    (corpus / "b.txt").write_bytes(PLAINTEXT[256:512])
    out = tmp_path / "report.csv"

    code = main([
        "analyze", "--key", str(key_path), "--corpus", str(corpus),
        "--tests", "sensitivity,keysens", "--flips", "4", "--out", str(out),
    ])
    assert code == EXIT_OK
    rows = read_csv(out)[1:]
    subjects = {(test, subject) for test, subject, _, _ in rows}
    assert {("sensitivity", "a.txt"), ("sensitivity", "b.txt"), ("sensitivity", "all")} <= subjects
    assert {("keysens", "a.txt"), ("keysens", "b.txt"), ("keysens", "all")} <= subjects
    for test, _, metric, value in rows:
        if metric.endswith("percent"):
            assert 0.0 <= float(value) <= 100.0


def test_analyze_known_plaintext_attack(tmp_path, key_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "msg.txt").write_bytes(PLAINTEXT[:64])
    out, candidates = tmp_path / "report.csv", tmp_path / "candidates.csv"

    code = main([
        "analyze", "--key", str(key_path), "--corpus", str(corpus), "--tests", "kpa",
        "--grid-min", "3.987654", "--grid-max", "3.987655", "--grid-step", "1e-9",
        "--out", str(out), "--attack-out", str(candidates),
    ])
    assert code == EXIT_OK

    metrics = {metric: value for test, subject, metric, value in read_csv(out)[1:] if subject == "msg.txt"}
    assert metrics["searched"] == "1001"
    assert metrics["true_key_found"] == "1"

    found = read_csv(candidates)
    assert found[0] == ["rank", "r", "matched_bytes"]
    assert "3.987654321" in [row[1] for row in found[1:]]


def test_attack_out_without_kpa(tmp_path, key_path):
    code = main([
        "analyze", "--key", str(key_path), "--tests", "keyspace",
        "--out", str(tmp_path / "r.csv"), "--attack-out", str(tmp_path / "c.csv"),
    ])
    assert code == EXIT_ANALYSIS


def test_keygen_to_stdout(capsysbinary):
    assert main(["keygen"]) == EXIT_OK
    keyfile = parse_key_text(capsysbinary.readouterr().out.decode("utf-8"))
    assert keyfile.mode is Mode.LENIENT


@pytest.mark.parametrize("r", ["inf", "-inf", "1e300"])
def test_key_file_with_unusable_r(tmp_path, key_path, r):
    text = key_path.read_text(encoding="utf-8").replace("r = 3.987654321", f"r = {r}")
    assert f"r = {r}" in text
    bad = tmp_path / "unusable.txt"
    bad.write_text(text, encoding="utf-8")
    plain = tmp_path / "plain.txt"
    plain.write_bytes(b"hello")
    assert main(["encrypt", "--key", str(bad), "--in", str(plain), "--out", str(tmp_path / "c")]) == EXIT_KEY


@pytest.mark.parametrize("grid_max", ["inf", "1e300", "nan"])
def test_analyze_grid_with_unusable_bound(tmp_path, key_path, grid_max):
    code = main([
        "analyze", "--key", str(key_path), "--tests", "keyspace",
        "--grid-min", "3.6", "--grid-max", grid_max, "--grid-step", "0.1",
        "--out", str(tmp_path / "r.csv"),
    ])
    assert code == EXIT_REGION


def test_unknown_log_level_is_a_usage_error(monkeypatch, tmp_path):
    monkeypatch.setenv("HMEC_LOG_LEVEL", "verbose")
    assert main(["keygen", "--out", str(tmp_path / "key.txt")]) == EXIT_USAGE
    assert not (tmp_path / "key.txt").exists()
