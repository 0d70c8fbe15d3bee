"""
Error types shared by every package of the filter
"""


class NlpfError(Exception):
    """Base class for all filter errors"""


class EmptyCloudError(NlpfError, ValueError):
    """Raised when an operation receives a cloud without points"""

    def __init__(self, message: str = "empty input"):
        super().__init__(message)


class PatchSizeError(NlpfError, ValueError):
    """Raised when a patch asks for more neighbors than the cloud holds"""

    def __init__(self, k: int, n: int):
        super().__init__(f"patch larger than cloud (K={k}, N={n})")
        self.k = k
        self.n = n


class NonFiniteError(NlpfError, ValueError):
    """Raised on NaN or infinite coordinates"""


class CloudFormatError(NlpfError):
    """Raised when a point-cloud file cannot be parsed"""

    def __init__(self, message: str, line: int = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
