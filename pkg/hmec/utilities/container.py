"""
Binary container for encrypted files.

    offset  size  field
    0       4     magic b"HMEC"
    4       1     version (1)
    5       1     mode (0 strict, 1 lenient)
    6       8     original plaintext length, unsigned big-endian
    14      ...   ciphertext payload

There is no integrity tag: a wrong key decrypts to garbage without error.
"""

import struct

from pydantic import BaseModel, ConfigDict, Field

from ..cipher import Mode, padded_length
from .errors import MalformedContainerError

MAGIC = b"HMEC"
VERSION = 1
HEADER = struct.Struct(">4sBBQ")

MODE_CODES = {Mode.STRICT: 0, Mode.LENIENT: 1}
CODE_MODES = {code: mode for mode, code in MODE_CODES.items()}


class CipherContainer(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Mode
    original_length: int = Field(ge=0, lt=2**64)
    payload: bytes
    version: int = VERSION


def pack_container(container: CipherContainer) -> bytes:
    expected = padded_length(container.original_length, container.mode)
    if len(container.payload) != expected:
        raise MalformedContainerError(
            f"payload has {len(container.payload)} bytes, {expected} expected for "
            f"{container.original_length} plaintext bytes in {container.mode.value} mode"
        )
    header = HEADER.pack(MAGIC, container.version, MODE_CODES[container.mode], container.original_length)
    return header + container.payload


def parse_container(data: bytes) -> CipherContainer:
    if len(data) < HEADER.size:
        raise MalformedContainerError(f"container is {len(data)} bytes, shorter than the {HEADER.size}-byte header")
    magic, version, mode_code, length = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise MalformedContainerError(f"bad magic {magic!r}")
    if version != VERSION:
        raise MalformedContainerError(f"unsupported container version {version}")
    if mode_code not in CODE_MODES:
        raise MalformedContainerError(f"unknown mode code {mode_code}")
    mode = CODE_MODES[mode_code]
    payload = data[HEADER.size:]
    expected = padded_length(length, mode)
    if len(payload) != expected:
        raise MalformedContainerError(
            f"payload has {len(payload)} bytes, header declares {length} plaintext bytes ({expected} expected)"
        )
    return CipherContainer(mode=mode, original_length=length, payload=payload, version=version)
