"""Fixed-memory streaming estimators.

:class:`EstimatorState` holds the running ``m x m`` estimate and a ring of the
last ``h - 1`` return vectors.  Feeding returns one at a time (or in blocks)
reproduces the banded quadratic form ``Y W Y'`` with ``w_ij = u_|i-j|``, with
edge effects omitted.

:class:`LagBank` keeps realized autocovariances for every lag below ``H``.
A bank is equivalent to running one :class:`EstimatorState` per updating
vector of length ``<= H``, which makes bandwidth sweeps cheap.
"""
from __future__ import annotations

import io

import numpy as np

from . import _backend
from .errors import DimensionError, ParameterError
from .weights import EstimatorKind, UpdatingVector

__all__ = ["EstimatorState", "LagBank"]

_SNAPSHOT_VERSION = 1


def _as_block(y, m):
    arr = np.asarray(y, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2 or arr.shape[1] != m:
        raise DimensionError(f"expected return vector(s) of dimension {m}, got shape {np.shape(y)}")
    return np.ascontiguousarray(arr)


class EstimatorState:
    """Streaming state of one banded quadratic estimator.

    Parameters
    ----------
    u : UpdatingVector
        Band coefficients; ``u.h`` fixes the ring capacity at ``h - 1``.
    m : int
        Number of assets.
    backend : {"cython", "python"}, optional
        Kernel implementation; defaults to the one selected at import.

    Notes
    -----
    Stored reals: ``m*m`` (accumulator) + ``m*(h-1)`` (ring) + ``m`` (scratch
    for the incoming observation) = ``m*(m+h)``.  Not thread-safe; one writer
    per state.
    """

    def __init__(self, u: UpdatingVector, m: int, backend=None):
        if not isinstance(u, UpdatingVector):
            raise TypeError("u must be an UpdatingVector")
        m = int(m)
        if m < 1:
            raise ParameterError(f"asset count must be positive, got {m}")
        self.u = u
        self.m = m
        self._k = _backend.get_kernels(backend)
        self._coef = np.ascontiguousarray(u.u, dtype=np.float64)
        self._acc = np.zeros((m, m))
        self._ring = np.zeros((u.h - 1, m))
        self._scratch = np.zeros((1, m))
        self._head = 0
        self.count = 0

    @property
    def h(self) -> int:
        return self.u.h

    @property
    def kind(self) -> EstimatorKind:
        return self.u.kind

    @property
    def ring_capacity(self) -> int:
        return self._ring.shape[0]

    @property
    def ring_size(self) -> int:
        return min(self.count, self.ring_capacity)

    @property
    def stored_reals(self) -> int:
        return self._acc.size + self._ring.size + self._scratch.size

    def update(self, y) -> "EstimatorState":
        """Consume one return vector ``y`` (length ``m``)."""
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.m,):
            raise DimensionError(f"expected a return vector of dimension {self.m}, got shape {y.shape}")
        self._scratch[0] = y
        self._head, self.count = self._k.banded_update(
            self._acc, self._ring, self._head, self.count, self._coef, self._scratch
        )
        return self

    def update_block(self, Y) -> "EstimatorState":
        """Consume returns row by row from an ``(n, m)`` array.

        Equivalent to calling :meth:`update` on each row in order.
        """
        block = _as_block(Y, self.m)
        self._head, self.count = self._k.banded_update(
            self._acc, self._ring, self._head, self.count, self._coef, block
        )
        return self

    def current(self) -> np.ndarray:
        """Copy of the running estimate."""
        return self._acc.copy()

    def recent_returns(self) -> np.ndarray:
        """Retained returns, oldest first, shape ``(ring_size, m)``."""
        filled = self.ring_size
        if filled == 0:
            return np.zeros((0, self.m))
        idx = (self._head - filled + np.arange(filled)) % self.ring_capacity
        return self._ring[idx].copy()

    def reset(self) -> None:
        self._acc[...] = 0.0
        self._ring[...] = 0.0
        self._head = 0
        self.count = 0

    # -- checkpointing -------------------------------------------------

    def to_bytes(self) -> bytes:
        """Serialize to an uncompressed NumPy ``.npz`` archive.

        Keys: ``version``, ``kind``, ``h``, ``u``, ``m``, ``acc``, ``ring``
        (physical ring layout), ``head``, ``count``.  Arrays are stored as
        raw float64, so a round trip is bit-exact.
        """
        buf = io.BytesIO()
        np.savez(
            buf,
            version=np.int64(_SNAPSHOT_VERSION),
            kind=np.array(self.kind.value),
            h=np.int64(self.h),
            u=self._coef,
            m=np.int64(self.m),
            acc=self._acc,
            ring=self._ring,
            head=np.int64(self._head),
            count=np.int64(self.count),
        )
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, data: bytes, backend=None) -> "EstimatorState":
        with np.load(io.BytesIO(data), allow_pickle=False) as z:
            version = int(z["version"])
            if version != _SNAPSHOT_VERSION:
                raise ParameterError(f"unsupported snapshot version {version}")
            u = UpdatingVector(EstimatorKind.parse(str(z["kind"])), int(z["h"]), z["u"])
            state = cls(u, int(z["m"]), backend=backend)
            state._acc[...] = z["acc"]
            state._ring[...] = z["ring"]
            state._head = int(z["head"])
            state.count = int(z["count"])
        return state

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path, backend=None) -> "EstimatorState":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read(), backend=backend)

    def __repr__(self):
        return f"EstimatorState(kind={self.kind.value}, h={self.h}, m={self.m}, count={self.count})"


class LagBank:
    """Realized autocovariances ``RA_0..RA_{H-1}`` maintained in one pass.

    ``estimate(u)`` equals the :class:`EstimatorState` value for any updating
    vector with ``h <= H`` fed the same returns.  Memory is
    ``m*m*H + m*(H-1) + m`` reals.
    """

    def __init__(self, max_h: int, m: int, backend=None):
        max_h = int(max_h)
        if max_h < 1:
            raise ParameterError(f"bank size must be positive, got {max_h}")
        self.max_h = max_h
        self.m = int(m)
        self._k = _backend.get_kernels(backend)
        self._lags = np.zeros((max_h, self.m, self.m))
        self._ring = np.zeros((max_h - 1, self.m))
        self._head = 0
        self.count = 0

    @property
    def stored_reals(self) -> int:
        return self._lags.size + self._ring.size + self.m

    def update_block(self, Y) -> "LagBank":
        block = _as_block(Y, self.m)
        self._head, self.count = self._k.lag_update(self._lags, self._ring, self._head, self.count, block)
        return self

    def update(self, y) -> "LagBank":
        return self.update_block(np.asarray(y, dtype=np.float64).reshape(1, -1))

    def autocovariance(self, lag: int) -> np.ndarray:
        """``RA_lag``; negative lags return the transpose of the positive one."""
        if abs(lag) >= self.max_h:
            raise ParameterError(f"lag {lag} not retained (bank size {self.max_h})")
        ra = self._lags[abs(lag)]
        return ra.T.copy() if lag < 0 else ra.copy()

    def estimate(self, u: UpdatingVector) -> np.ndarray:
        h = u.h
        if h > self.max_h:
            raise ParameterError(f"bandwidth {h} exceeds bank size {self.max_h}")
        coef = u.u
        est = coef[0] * self._lags[0]
        if h > 1:
            side = np.tensordot(coef[1:], self._lags[1:h], axes=1)
            est = est + side + side.T
        upper = np.triu(est)
        return upper + np.triu(upper, 1).T
