from typing import Optional


class ForensicsError(Exception):
    """Base class for every error raised by the forensics library."""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.path = path

    def __str__(self) -> str:
        if self.path:
            return f"{self.message} ({self.path})"
        return self.message


class ImageIOError(ForensicsError):
    """File missing or unreadable."""


class DecodeError(ForensicsError):
    """File exists but is not a decodable PNG/PGM."""


class ShapeMismatch(ForensicsError):
    pass


class EmptyPatchSet(ForensicsError):
    pass


class ImageTooSmall(ForensicsError):
    pass


class InsufficientPatches(ForensicsError):
    """Fewer patches than patch dimensions; the covariance would be rank-deficient."""


class DegenerateReference(ForensicsError):
    pass


class DegenerateInput(ForensicsError):
    pass


class UnknownLabel(ForensicsError):
    pass


class EmptyDataset(ForensicsError):
    pass


class RegionTooLarge(ForensicsError):
    pass


class InvalidRegion(ForensicsError):
    pass


class ConfigError(ForensicsError):
    pass
