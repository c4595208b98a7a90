"""Hill cipher over Z/128Z with a 2x2 key matrix."""

from __future__ import annotations

from typing import List, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..utilities.errors import NonAsciiInputError, NonInvertibleKeyError

HILL_MODULUS = 128
BLOCK_SIZE = 2

Matrix = Tuple[Tuple[int, int], Tuple[int, int]]


def _det(m: Matrix) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


class HillKey(BaseModel):
    """Key matrix K; entries are stored reduced mod 128 and det(K) must be odd."""
    model_config = ConfigDict(frozen=True)

    matrix: Matrix = Field(description="2x2 key matrix, row-major")

    @field_validator("matrix", mode="before")
    @classmethod
    def _reduce(cls, value):
        rows = [list(row) for row in value]
        if len(rows) != BLOCK_SIZE or any(len(row) != BLOCK_SIZE for row in rows):
            raise ValueError(f"Hill key must be {BLOCK_SIZE}x{BLOCK_SIZE}")
        return tuple(tuple(int(v) % HILL_MODULUS for v in row) for row in rows)

    @field_validator("matrix")
    @classmethod
    def _odd_determinant(cls, value: Matrix) -> Matrix:
        if _det(value) % 2 == 0:
            raise ValueError(f"det(K)={_det(value) % HILL_MODULUS} is even, K has no inverse mod {HILL_MODULUS}")
        return value

    @property
    def determinant(self) -> int:
        return _det(self.matrix) % HILL_MODULUS

    def rows(self) -> List[List[int]]:
        return [list(row) for row in self.matrix]


IDENTITY = HillKey(matrix=((1, 0), (0, 1)))


def _apply(matrix: Matrix, block: Sequence[int]) -> List[int]:
    return [
        (matrix[0][0] * block[0] + matrix[0][1] * block[1]) % HILL_MODULUS,
        (matrix[1][0] * block[0] + matrix[1][1] * block[1]) % HILL_MODULUS,
    ]


def _check_block(block: Sequence[int]) -> None:
    if len(block) != BLOCK_SIZE:
        raise ValueError(f"Hill block must hold {BLOCK_SIZE} values, got {len(block)}")
    for value in block:
        if not 0 <= value < HILL_MODULUS:
            raise NonAsciiInputError(f"Hill block entry {value} outside [0, {HILL_MODULUS})")


def hill_encrypt_block(key: HillKey, block: Sequence[int]) -> List[int]:
    """(K·p) mod 128."""
    _check_block(block)
    return _apply(key.matrix, block)


def hill_decrypt_block(inverse: HillKey, block: Sequence[int]) -> List[int]:
    """Apply K⁻¹; entries are reduced mod 128 first so wrong-key noise still decodes."""
    if len(block) != BLOCK_SIZE:
        raise ValueError(f"Hill block must hold {BLOCK_SIZE} values, got {len(block)}")
    return _apply(inverse.matrix, [v % HILL_MODULUS for v in block])


def hill_matrix_inverse(key: HillKey) -> HillKey:
    """K⁻¹ mod 128 via the adjugate and the inverse of the (odd) determinant."""
    det = _det(key.matrix) % HILL_MODULUS
    if det % 2 == 0:
        raise NonInvertibleKeyError(f"det(K)={det} is not a unit mod {HILL_MODULUS}")
    det_inv = pow(det, -1, HILL_MODULUS)
    (a, b), (c, d) = key.matrix
    adjugate = ((d, -b), (-c, a))
    return HillKey(matrix=tuple(tuple(det_inv * v % HILL_MODULUS for v in row) for row in adjugate))


def hill_transform(key: HillKey, values: Sequence[int]) -> List[int]:
    """Encrypt a stream whose length is a multiple of the block size."""
    if len(values) % BLOCK_SIZE:
        raise ValueError(f"stream length {len(values)} is not a multiple of {BLOCK_SIZE}")
    out: List[int] = []
    for i in range(0, len(values), BLOCK_SIZE):
        out.extend(hill_encrypt_block(key, values[i:i + BLOCK_SIZE]))
    return out


def hill_untransform(inverse: HillKey, values: Sequence[int]) -> List[int]:
    if len(values) % BLOCK_SIZE:
        raise ValueError(f"stream length {len(values)} is not a multiple of {BLOCK_SIZE}")
    out: List[int] = []
    for i in range(0, len(values), BLOCK_SIZE):
        out.extend(hill_decrypt_block(inverse, values[i:i + BLOCK_SIZE]))
    return out
