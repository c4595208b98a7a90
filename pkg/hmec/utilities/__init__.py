"""Configuration, errors and Temporal connectivity shared by the CLI and the worker."""

from .errors import (
    AnalysisError,
    ChaoticRegionError,
    GridError,
    HmecError,
    KeyFileError,
    MalformedCiphertextError,
    MalformedContainerError,
    NonAsciiInputError,
    NonInvertibleKeyError,
)
from .settings import Settings, get_settings
from .temporal_client import get_temporal_client

__all__ = [
    "AnalysisError",
    "ChaoticRegionError",
    "GridError",
    "HmecError",
    "KeyFileError",
    "MalformedCiphertextError",
    "MalformedContainerError",
    "NonAsciiInputError",
    "NonInvertibleKeyError",
    "Settings",
    "get_settings",
    "get_temporal_client",
]
