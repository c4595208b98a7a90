"""
Hybrid message-embedded chaotic cipher.

Signal path per embedded symbol (P -> Z -> Y -> C, with C fed back into X):

    z  = Hill(K, p)                  block-wise, mod 128
    s  = NLFSR(z)                    8 register steps
    x  = f^n1(x);  y = (s + q(x)) mod 256
    x  = f^n2(x);  c = y XOR q(x)
    x  = frac(x + (c + 1)/257)       feedback, before the next symbol

Decryption replays the same state trajectory because the feedback is the
ciphertext byte, which the receiver already holds.
"""

from __future__ import annotations

import math
from enum import Enum
from typing import Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .chaos import CHAOTIC_R_MAX, CHAOTIC_R_MIN, iterate_value, perturb_value, quantize_value
from .primitives.hill import (
    BLOCK_SIZE,
    HILL_MODULUS,
    HillKey,
    hill_matrix_inverse,
    hill_transform,
    hill_untransform,
)
from .primitives.nlfsr import DEFAULT_NLFSR, NlfsrSpec, inverse_table, substitution_table
from .utilities.errors import MalformedCiphertextError, NonAsciiInputError

R_DECIMALS = 9
R_SCALE = 10 ** R_DECIMALS
R_LIMIT = 1e6  # |r| beyond this cannot be snapped exactly
MAX_ITERATIONS = 1000


def normalize_r(r: float) -> float:
    """Snap r onto the 10⁻⁹ fixed-point grid (integer nanos / 1e9)."""
    if not math.isfinite(r) or abs(r) > R_LIMIT:
        raise ValueError(f"r={r} is not a usable map parameter")
    return round(r * R_SCALE) / R_SCALE


class Mode(str, Enum):
    """How plaintext bytes are brought into the mod-128 Hill alphabet."""
    STRICT = "strict"    # ASCII only, one symbol per byte
    LENIENT = "lenient"  # any byte, two base-128 digits per byte


class CipherKey(BaseModel):
    """Full secret material."""
    model_config = ConfigDict(frozen=True)

    r: float = Field(ge=CHAOTIC_R_MIN, le=CHAOTIC_R_MAX, description="Logistic parameter, 9 decimal places")
    x0: float = Field(gt=0.0, lt=1.0, description="Initial chaotic state")
    n1: int = Field(ge=1, le=MAX_ITERATIONS, description="Map iterations before the additive mix")
    n2: int = Field(ge=1, le=MAX_ITERATIONS, description="Map iterations before the XOR mix")
    hill: HillKey = Field(description="Hill pre-encryption matrix")

    @field_validator("r", mode="before")
    @classmethod
    def _snap_r(cls, value):
        return normalize_r(float(value))

    def with_r(self, r: float) -> "CipherKey":
        return CipherKey(r=r, x0=self.x0, n1=self.n1, n2=self.n2, hill=self.hill)


class PublicFields(BaseModel):
    """Everything in a CipherKey except r; what the attacker is assumed to know."""
    model_config = ConfigDict(frozen=True)

    x0: float = Field(gt=0.0, lt=1.0)
    n1: int = Field(ge=1, le=MAX_ITERATIONS)
    n2: int = Field(ge=1, le=MAX_ITERATIONS)
    hill: HillKey

    @classmethod
    def of(cls, key: CipherKey) -> "PublicFields":
        return cls(x0=key.x0, n1=key.n1, n2=key.n2, hill=key.hill)

    def with_r(self, r: float) -> CipherKey:
        return CipherKey(r=r, x0=self.x0, n1=self.n1, n2=self.n2, hill=self.hill)


class SignalTrace(BaseModel):
    """One embedded symbol through the pipeline."""
    index: int
    z: int = Field(description="Hill stage output")
    s: int = Field(description="NLFSR output")
    k1: int = Field(description="Quantized state after n1 iterations")
    y: int = Field(description="Intermediate value (s + k1) mod 256")
    k2: int = Field(description="Quantized state after n2 further iterations")
    c: int = Field(description="Ciphertext byte")
    x: float = Field(description="Chaotic state that produced k2")


# -- alphabet embedding --------------------------------------------------------

def embed(plaintext: bytes, mode: Mode = Mode.LENIENT) -> List[int]:
    """Plaintext bytes -> mod-128 symbols, zero-padded to the block size."""
    if Mode(mode) is Mode.STRICT:
        for i, b in enumerate(plaintext):
            if b >= HILL_MODULUS:
                raise NonAsciiInputError(f"byte 0x{b:02x} at offset {i} is not ASCII (strict mode)")
        symbols = list(plaintext)
    else:
        symbols = []
        for b in plaintext:
            symbols.extend(divmod(b, HILL_MODULUS))
    symbols.extend([0] * (-len(symbols) % BLOCK_SIZE))
    return symbols


def unembed(symbols: Sequence[int], mode: Mode = Mode.LENIENT) -> bytes:
    if Mode(mode) is Mode.STRICT:
        return bytes(s & 0x7F for s in symbols)
    return bytes(((symbols[i] << 7) | symbols[i + 1]) & 0xFF for i in range(0, len(symbols) - 1, 2))


def padded_length(plaintext_length: int, mode: Mode = Mode.LENIENT) -> int:
    """Ciphertext length for a plaintext of the given length."""
    if Mode(mode) is Mode.LENIENT:
        return 2 * plaintext_length
    return plaintext_length + (-plaintext_length % BLOCK_SIZE)


def symbol_offset(byte_index: int, mode: Mode = Mode.LENIENT) -> int:
    """Index of the first ciphertext byte that depends on a given plaintext byte."""
    if Mode(mode) is Mode.LENIENT:
        return 2 * byte_index
    return byte_index - byte_index % BLOCK_SIZE


# -- keystream stage -----------------------------------------------------------

Step = Tuple[int, int, int, int, int, int, float]


def _mix_forward(key: CipherKey, hill_symbols: Sequence[int], nlfsr: NlfsrSpec) -> Iterator[Step]:
    """Yields (z, s, k1, y, k2, c, x) per symbol."""
    table = substitution_table(nlfsr).tolist()
    r, n1, n2 = key.r, key.n1, key.n2
    x = key.x0
    for z in hill_symbols:
        s = table[z]
        x = iterate_value(r, x, n1)
        k1 = quantize_value(x)
        y = (s + k1) & 0xFF
        x = iterate_value(r, x, n2)
        k2 = quantize_value(x)
        c = y ^ k2
        yield z, s, k1, y, k2, c, x
        x = perturb_value(x, c)


def _mix_backward(key: CipherKey, ciphertext: bytes, nlfsr: NlfsrSpec) -> List[int]:
    table = inverse_table(nlfsr).tolist()
    r, n1, n2 = key.r, key.n1, key.n2
    x = key.x0
    out = []
    for c in ciphertext:
        x = iterate_value(r, x, n1)
        k1 = quantize_value(x)
        x = iterate_value(r, x, n2)
        k2 = quantize_value(x)
        s = ((c ^ k2) - k1) & 0xFF
        out.append(table[s])
        x = perturb_value(x, c)
    return out


# -- public operations ---------------------------------------------------------

def encrypt(
    key: CipherKey,
    plaintext: bytes,
    mode: Mode = Mode.LENIENT,
    nlfsr: NlfsrSpec = DEFAULT_NLFSR,
) -> bytes:
    if not plaintext:
        return b""
    z = hill_transform(key.hill, embed(plaintext, mode))
    return bytes(step[5] for step in _mix_forward(key, z, nlfsr))


def decrypt(
    key: CipherKey,
    ciphertext: bytes,
    mode: Mode = Mode.LENIENT,
    length: Optional[int] = None,
    nlfsr: NlfsrSpec = DEFAULT_NLFSR,
) -> bytes:
    """
    Exact inverse of encrypt. ``length`` truncates strict-mode padding; without
    it a strict-mode result keeps any trailing pad byte.

    A wrong key decrypts without error into unrelated bytes: there is no
    integrity check.
    """
    if len(ciphertext) % BLOCK_SIZE:
        raise MalformedCiphertextError(
            f"ciphertext length {len(ciphertext)} is not a multiple of the block size {BLOCK_SIZE}"
        )
    z = _mix_backward(key, ciphertext, nlfsr)
    plaintext = unembed(hill_untransform(hill_matrix_inverse(key.hill), z), mode)
    if length is not None:
        if length > len(plaintext):
            raise MalformedCiphertextError(f"declared length {length} exceeds the {len(plaintext)} decrypted bytes")
        plaintext = plaintext[:length]
    return plaintext


def trace_encryption(
    key: CipherKey,
    plaintext: bytes,
    mode: Mode = Mode.LENIENT,
    nlfsr: NlfsrSpec = DEFAULT_NLFSR,
) -> List[SignalTrace]:
    z = hill_transform(key.hill, embed(plaintext, mode))
    return [
        SignalTrace(index=i, z=z_i, s=s, k1=k1, y=y, k2=k2, c=c, x=x)
        for i, (z_i, s, k1, y, k2, c, x) in enumerate(_mix_forward(key, z, nlfsr))
    ]
