"""
Key documents: UTF-8, one ``field = value`` per line.

    # hmec key
    r = 3.987654321
    x0 = 0.41234567890123451
    n1 = 3
    n2 = 4
    k_row0 = 3 5
    k_row1 = 7 2
    mode = lenient

``#`` starts a comment line; blank lines are ignored. Every field is required
exactly once.
"""

import secrets
from pathlib import Path
from typing import Dict, Union

from pydantic import BaseModel, ConfigDict, ValidationError

from ..cipher import MAX_ITERATIONS, R_SCALE, CipherKey, Mode
from ..chaos import CHAOTIC_R_MAX, CHAOTIC_R_MIN
from ..primitives.hill import HILL_MODULUS, HillKey
from .errors import KeyFileError

FIELDS = ("r", "x0", "n1", "n2", "k_row0", "k_row1", "mode")


class KeyFile(BaseModel):
    """A parsed key document: the cipher key plus the embedding mode it was issued for."""
    model_config = ConfigDict(frozen=True)

    key: CipherKey
    mode: Mode = Mode.LENIENT


def _row(field: str, text: str):
    parts = text.split()
    if len(parts) != 2:
        raise KeyFileError(f"{field} needs two integers, got {text!r}")
    try:
        return tuple(int(p) for p in parts)
    except ValueError as e:
        raise KeyFileError(f"{field} needs two integers, got {text!r}") from e


def parse_key_text(text: str) -> KeyFile:
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, value = line.partition("=")
        name, value = name.strip(), value.strip()
        if not sep or not value:
            raise KeyFileError(f"line {lineno}: expected 'field = value', got {raw!r}")
        if name not in FIELDS:
            raise KeyFileError(f"line {lineno}: unknown field {name!r}")
        if name in values:
            raise KeyFileError(f"line {lineno}: duplicate field {name!r}")
        values[name] = value

    missing = [f for f in FIELDS if f not in values]
    if missing:
        raise KeyFileError(f"missing field(s): {', '.join(missing)}")

    try:
        key = CipherKey(
            r=float(values["r"]),
            x0=float(values["x0"]),
            n1=int(values["n1"]),
            n2=int(values["n2"]),
            hill=HillKey(matrix=(_row("k_row0", values["k_row0"]), _row("k_row1", values["k_row1"]))),
        )
        return KeyFile(key=key, mode=Mode(values["mode"]))
    except (ValidationError, ValueError) as e:
        if isinstance(e, KeyFileError):
            raise
        raise KeyFileError(f"invalid key: {e}") from e


def serialize_key(keyfile: KeyFile) -> str:
    key = keyfile.key
    (a, b), (c, d) = key.hill.matrix
    return (
        "# hmec key\n"
        f"r = {key.r:.9f}\n"
        f"x0 = {key.x0:.17g}\n"
        f"n1 = {key.n1}\n"
        f"n2 = {key.n2}\n"
        f"k_row0 = {a} {b}\n"
        f"k_row1 = {c} {d}\n"
        f"mode = {keyfile.mode.value}\n"
    )


def load_key(path: Union[str, Path]) -> KeyFile:
    """Read and parse a key file. OSError propagates; content problems raise KeyFileError."""
    raw = Path(path).read_bytes()
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as e:
        raise KeyFileError(f"{path} is not UTF-8: {e}") from e
    return parse_key_text(text)


def save_key(keyfile: KeyFile, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_key(keyfile), encoding="utf-8")


def generate_key(mode: Mode = Mode.LENIENT, max_iterations: int = 16) -> KeyFile:
    """Fresh key from the OS CSPRNG: r on the 1e-9 grid, x0 in (0, 1), odd-determinant K."""
    span = round((CHAOTIC_R_MAX - CHAOTIC_R_MIN) * R_SCALE)
    r = (round(CHAOTIC_R_MIN * R_SCALE) + secrets.randbelow(span + 1)) / R_SCALE
    x0 = (secrets.randbelow(2**53 - 1) + 1) / 2**53
    n1 = secrets.randbelow(min(max_iterations, MAX_ITERATIONS)) + 1
    n2 = secrets.randbelow(min(max_iterations, MAX_ITERATIONS)) + 1
    while True:
        matrix = tuple(tuple(secrets.randbelow(HILL_MODULUS) for _ in range(2)) for _ in range(2))
        if (matrix[0][0] * matrix[1][1] - matrix[0][1] * matrix[1][0]) % 2:
            break
    key = CipherKey(r=r, x0=x0, n1=n1, n2=n2, hill=HillKey(matrix=matrix))
    return KeyFile(key=key, mode=Mode(mode))
