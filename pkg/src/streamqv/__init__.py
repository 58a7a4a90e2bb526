"""Fixed-memory streaming estimators of quadratic covariation.

Estimates the integrated covariance of several assets from noisy,
non-synchronous ticks: refresh-time synchronization, then a banded quadratic
form in the returns updated one return at a time with ``m*(m+h)`` stored
reals.
"""
from ._backend import BACKEND
from .errors import (
    BandwidthError,
    DimensionError,
    IngestionError,
    NoReturnsError,
    OrderingError,
    ParameterError,
    StreamQVError,
    SynchronizationError,
)
from .stream import EstimatorState, LagBank
from .sync import SyncedPanel, SyncState, TickStream, refresh_times, synchronize
from .weights import EstimatorKind, UpdatingVector, updating_vector

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "BandwidthError",
    "DimensionError",
    "EstimatorKind",
    "EstimatorState",
    "IngestionError",
    "LagBank",
    "NoReturnsError",
    "OrderingError",
    "ParameterError",
    "StreamQVError",
    "SyncState",
    "SyncedPanel",
    "SynchronizationError",
    "TickStream",
    "UpdatingVector",
    "refresh_times",
    "synchronize",
    "updating_vector",
]
