"""
Vectorized cipher evaluation over many keys at once.

The brute-force and identifiability scans run the stream cipher for every
grid point in lockstep: one numpy array holds the chaotic state of each
candidate key. Results are bit-identical to ``hmec.cipher`` for the same key.
"""

from __future__ import annotations

from typing import NamedTuple, Optional, Sequence

import numpy as np

from .chaos import iterate_array, perturb_array, quantize_array
from .cipher import PublicFields
from .primitives.hill import HILL_MODULUS, hill_matrix_inverse, hill_transform
from .primitives.nlfsr import DEFAULT_NLFSR, NlfsrSpec, inverse_table, substitution_table


class SweepOutput(NamedTuple):
    ciphertext: np.ndarray  # (keys, symbols) uint8
    states: np.ndarray      # (keys, symbols) float64, state that produced the XOR byte


class GridEngine:
    """The cipher for a vector of r values (and optionally matching x0 values)."""

    def __init__(
        self,
        r: np.ndarray,
        public: PublicFields,
        x0: Optional[np.ndarray] = None,
        nlfsr: NlfsrSpec = DEFAULT_NLFSR,
    ):
        self.r = np.ascontiguousarray(r, dtype=np.float64)
        if x0 is None:
            self.x0 = np.full(self.r.shape, public.x0, dtype=np.float64)
        else:
            self.x0 = np.broadcast_to(np.asarray(x0, dtype=np.float64), self.r.shape).copy()
        self.public = public
        self.nlfsr = nlfsr

    def __len__(self) -> int:
        return self.r.shape[0]

    def encrypt_symbols(self, hill_symbols: Sequence[int]) -> SweepOutput:
        """Keystream stage for an already Hill-encrypted symbol stream."""
        table = substitution_table(self.nlfsr)
        n1, n2 = self.public.n1, self.public.n2
        count = len(hill_symbols)
        ciphertext = np.empty((len(self), count), dtype=np.uint8)
        states = np.empty((len(self), count), dtype=np.float64)

        x = self.x0
        for i, z in enumerate(hill_symbols):
            s = int(table[z])
            x = iterate_array(self.r, x, n1)
            y = (s + quantize_array(x)) & 0xFF
            x = iterate_array(self.r, x, n2)
            c = y ^ quantize_array(x)
            ciphertext[:, i] = c
            states[:, i] = x
            x = perturb_array(x, c)
        return SweepOutput(ciphertext=ciphertext, states=states)

    def encrypt(self, symbols: Sequence[int]) -> SweepOutput:
        """Encrypt an embedded (mod-128, block-padded) symbol stream under every key."""
        return self.encrypt_symbols(hill_transform(self.public.hill, symbols))

    def decrypt_symbols(self, ciphertext: bytes) -> np.ndarray:
        """Embedded plaintext symbols (keys, len(ciphertext)) recovered under every key."""
        table = inverse_table(self.nlfsr)
        n1, n2 = self.public.n1, self.public.n2
        z = np.empty((len(self), len(ciphertext)), dtype=np.int64)

        x = self.x0
        for i, c in enumerate(ciphertext):
            x = iterate_array(self.r, x, n1)
            k1 = quantize_array(x)
            x = iterate_array(self.r, x, n2)
            k2 = quantize_array(x)
            z[:, i] = table[((c ^ k2) - k1) & 0xFF]
            x = perturb_array(x, c)

        (a, b), (c_, d) = hill_matrix_inverse(self.public.hill).matrix
        z %= HILL_MODULUS
        even, odd = z[:, 0::2], z[:, 1::2]
        p = np.empty_like(z)
        p[:, 0::2] = (a * even + b * odd) % HILL_MODULUS
        p[:, 1::2] = (c_ * even + d * odd) % HILL_MODULUS
        return p
