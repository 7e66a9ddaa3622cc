"""Exception hierarchy for the hard TSP instance generator."""


class HardTspError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatchError(HardTspError, ValueError):
    """Two objects that must share a node count do not."""


class ParameterError(HardTspError, ValueError):
    """An argument is outside its documented range."""


class CostRangeError(HardTspError, OverflowError):
    """Scaled costs do not fit the 64-bit integer range."""


class MemoryLimitError(HardTspError, MemoryError):
    """The Held-Karp table would exceed the configured size cap."""


class LpError(HardTspError):
    """An LP solve ended with a status the caller cannot continue from."""

    def __init__(self, status: str, message: str = ""):
        self.status = status
        super().__init__(message or f"LP solve ended with status {status}")


class SamplerError(HardTspError):
    """Hit-and-run could not find a non-degenerate chord."""


class IterationCapError(HardTspError):
    """A sampling loop hit its draw cap before producing enough results."""


class IntegralVertexError(HardTspError):
    """Hardening was requested for an instance whose SEP optimum is integral."""


class SeparationTimeoutError(HardTspError):
    """Exact tour separation ran out of time before reaching a decision."""


class TsplibParseError(HardTspError, ValueError):
    """A TSPLIB file uses a keyword or section this reader does not support."""

    def __init__(self, keyword: str, message: str = ""):
        self.keyword = keyword
        super().__init__(message or f"Unsupported TSPLIB keyword or value: {keyword}")


class TsplibFetchError(HardTspError):
    """A TSPLIB file could not be downloaded."""
