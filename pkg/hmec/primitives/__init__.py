from .hill import (
    BLOCK_SIZE,
    HILL_MODULUS,
    HillKey,
    hill_decrypt_block,
    hill_encrypt_block,
    hill_matrix_inverse,
    hill_transform,
    hill_untransform,
)
from .nlfsr import DEFAULT_NLFSR, NlfsrSpec, inverse_table, nlfsr_inverse, nlfsr_substitute, substitution_table

__all__ = [
    "BLOCK_SIZE",
    "HILL_MODULUS",
    "HillKey",
    "hill_decrypt_block",
    "hill_encrypt_block",
    "hill_matrix_inverse",
    "hill_transform",
    "hill_untransform",
    "DEFAULT_NLFSR",
    "NlfsrSpec",
    "inverse_table",
    "nlfsr_inverse",
    "nlfsr_substitute",
    "substitution_table",
]
