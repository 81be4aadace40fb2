"""Exception types raised by the export adapter."""


class AdapterError(Exception):
    """Base class for every error the adapter raises on purpose."""


class SourceError(AdapterError):
    """Missing, empty or unreadable frame source."""


class BackendError(AdapterError):
    """Backend selection failed (missing weights, no runtime, ...)."""
