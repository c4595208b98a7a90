"""Domain errors shared by the cipher, the analysis tooling and the CLI."""


class HmecError(ValueError):
    """Base class. ``error_type`` is what Temporal activities report."""

    error_type = "HmecError"


class KeyFileError(HmecError):
    error_type = "KeyFileError"


class NonInvertibleKeyError(HmecError):
    error_type = "NonInvertibleKey"


class NonAsciiInputError(HmecError):
    error_type = "NonAsciiInput"


class MalformedCiphertextError(HmecError):
    error_type = "MalformedCiphertext"


class MalformedContainerError(HmecError):
    error_type = "MalformedContainer"


class ChaoticRegionError(HmecError):
    error_type = "ChaoticRegion"


class GridError(HmecError):
    error_type = "InvalidGrid"


class AnalysisError(HmecError):
    error_type = "AnalysisError"
