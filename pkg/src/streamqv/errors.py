"""Exception hierarchy shared across the package."""


class StreamQVError(Exception):
    """Base class for all package errors."""


class SynchronizationError(StreamQVError):
    """Refresh-time synchronization cannot be carried out (e.g. an empty stream)."""


class NoReturnsError(SynchronizationError):
    """Fewer than two refresh times, so no returns can be formed."""


class OrderingError(StreamQVError):
    """A tick arrived with a time earlier than a previous tick of the same asset."""


class ParameterError(StreamQVError, ValueError):
    """A parameter lies outside its valid domain."""


class BandwidthError(ParameterError):
    """Bandwidth too small for the requested estimator."""


class DimensionError(StreamQVError, ValueError):
    """Array shapes are inconsistent."""


class IngestionError(StreamQVError):
    """A tick or configuration file could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
