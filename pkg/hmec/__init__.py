"""Hybrid message-embedded chaotic cipher and its cryptanalysis tooling."""

from .cipher import CipherKey, Mode, PublicFields, decrypt, encrypt, trace_encryption
from .primitives.hill import HillKey

__all__ = ["CipherKey", "HillKey", "Mode", "PublicFields", "decrypt", "encrypt", "trace_encryption"]
