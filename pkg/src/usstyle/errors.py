"""Exception types raised by the usstyle library."""


class UsstyleError(Exception):
    """Base class for all library-specific failures."""


class MissingFileError(UsstyleError):
    """A required input file does not exist."""


class UnsupportedFormatError(UsstyleError):
    """The file is a format this library does not handle (8-bit PNG/PGM only)."""


class CorruptImageError(UsstyleError):
    """The file claims to be an image but cannot be decoded."""


class WeightFormatError(UsstyleError):
    """A weight file violates the WTS1 container format."""
