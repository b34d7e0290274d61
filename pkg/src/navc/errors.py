"""Exception types shared across the codec."""


class NavcError(Exception):
    """Base class for all codec errors."""


class InvalidSpecError(NavcError, ValueError):
    """A corpus or config spec is self-contradictory or degenerate."""


class DataError(NavcError, ValueError):
    """A data file is missing, truncated, or inconsistent with its sidecar."""


class ShapeError(NavcError, ValueError):
    """Array dimensions violate an operation's contract."""


class ConfigError(NavcError, ValueError):
    """Model/config mismatch, e.g. alphabet size or checkpoint hash."""


class CorruptStreamError(NavcError, ValueError):
    """A bitstream fails structural validation (magic, length, CRC)."""


class DivergenceError(NavcError, RuntimeError):
    """Training produced a non-finite loss."""
