"""Refresh-time synchronization of non-synchronous tick streams.

Refresh times are the instants by which every asset has traded at least once
since the previous refresh time.  Prices are carried forward (previous tick)
only to those instants, never to the full union grid.

Both a batch form (:func:`refresh_times`, :func:`synchronize`) and an
incremental form (:class:`SyncState`) are provided; the incremental one
emits exactly the batch panel when ticks are delivered in time order.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

from . import _backend
from .errors import NoReturnsError, OrderingError, ParameterError, SynchronizationError

__all__ = [
    "TickStream",
    "SyncedPanel",
    "SyncedObservation",
    "SyncState",
    "refresh_times",
    "synchronize",
    "replay",
    "merge_ticks",
    "iter_synchronized",
]


@dataclass(frozen=True)
class TickStream:
    """Ticks of one asset: strictly increasing times with log-prices."""

    times: np.ndarray
    prices: np.ndarray
    asset_id: int = 0

    def __post_init__(self):
        t = np.ascontiguousarray(self.times, dtype=np.float64).reshape(-1)
        p = np.ascontiguousarray(self.prices, dtype=np.float64).reshape(-1)
        if t.shape != p.shape:
            raise ParameterError(f"asset {self.asset_id}: {t.size} times but {p.size} prices")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise OrderingError(f"asset {self.asset_id}: tick times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "prices", p)

    def __len__(self):
        return self.times.size


@dataclass(frozen=True)
class SyncedPanel:
    """Refresh times ``T_0..T_n`` with the ``m x (n+1)`` synchronized prices."""

    times: np.ndarray
    prices: np.ndarray

    @property
    def m(self) -> int:
        return self.prices.shape[0]

    @property
    def n(self) -> int:
        """Number of returns."""
        return self.times.size - 1

    @property
    def returns(self) -> np.ndarray:
        """``m x n`` return matrix, column ``i`` is ``X_i - X_{i-1}``."""
        return np.diff(self.prices, axis=1)


@dataclass(frozen=True)
class SyncedObservation:
    time: float
    prices: np.ndarray


def _as_streams(streams) -> list[TickStream]:
    out = []
    for k, s in enumerate(streams):
        if not isinstance(s, TickStream):
            times, prices = s
            s = TickStream(times, prices, asset_id=k)
        out.append(s)
    if not out:
        raise SynchronizationError("no tick streams given")
    for s in out:
        if len(s) == 0:
            raise SynchronizationError(f"asset {s.asset_id} has no ticks; synchronization impossible")
    return out


def refresh_times(streams: Sequence[TickStream], backend=None) -> np.ndarray:
    """Refresh times of the given streams.

    ``T_0`` is the latest first tick; each next refresh time is the earliest
    instant by which every asset has a tick strictly after the previous one.
    Stops once some asset has no tick after the last refresh time, so the
    result can consist of ``T_0`` alone.

    Streams may also be given as ``(times, prices)`` pairs.
    """
    streams = _as_streams(streams)
    times = np.concatenate([s.times for s in streams])
    offsets = np.zeros(len(streams) + 1, dtype=np.intp)
    offsets[1:] = np.cumsum([len(s) for s in streams])
    return _backend.get_kernels(backend).refresh_times(times, offsets)


def synchronize(streams: Sequence[TickStream], allow_empty: bool = False, backend=None) -> SyncedPanel:
    """Previous-tick prices at the refresh times.

    Raises
    ------
    NoReturnsError
        Fewer than two refresh times, unless ``allow_empty`` is set (then a
        panel with zero returns is returned).
    """
    streams = _as_streams(streams)
    T = refresh_times(streams, backend=backend)
    if T.size < 2 and not allow_empty:
        raise NoReturnsError(f"only {T.size} refresh time(s); no returns can be formed")
    X = np.empty((len(streams), T.size))
    for k, s in enumerate(streams):
        idx = np.searchsorted(s.times, T, side="right") - 1
        X[k] = s.prices[idx]
    return SyncedPanel(T, X)


class SyncState:
    """Incremental refresh-time synchronizer with O(m) memory.

    Ticks must be delivered in non-decreasing global time order.  Ticks
    sharing one timestamp should go through :meth:`push_group` together;
    the result then does not depend on their order inside the group.
    :meth:`push_tick` is the single-tick case.
    """

    def __init__(self, m: int):
        m = int(m)
        if m < 1:
            raise ParameterError(f"asset count must be positive, got {m}")
        self.m = m
        self.last_time = np.full(m, -np.inf)
        self.last_price = np.full(m, np.nan)
        self.seen = np.zeros(m, dtype=bool)
        self.last_refresh = -np.inf
        self.emitted = 0
        self._clock = -np.inf

    @property
    def stored_pairs(self) -> int:
        """(time, price) pairs held; always ``m``."""
        return self.last_time.size

    def _apply(self, asset: int, time: float, price: float) -> None:
        if not 0 <= asset < self.m:
            raise ParameterError(f"asset index {asset} outside 0..{self.m - 1}")
        if time <= self.last_time[asset]:
            raise OrderingError(
                f"asset {asset}: tick at {time!r} not after previous tick at {self.last_time[asset]!r}"
            )
        if time < self._clock:
            raise OrderingError(f"tick at {time!r} arrived after a tick at {self._clock!r}")
        self._clock = time
        self.last_time[asset] = time
        self.last_price[asset] = price
        if time > self.last_refresh:
            self.seen[asset] = True

    def _maybe_emit(self, time: float):
        if not self.seen.all():
            return None
        # global ordering makes the current time the latest fresh tick
        self.last_refresh = time
        self.seen[:] = False
        self.emitted += 1
        return SyncedObservation(float(time), self.last_price.copy())

    def push_tick(self, asset: int, time: float, price: float):
        """Add one tick; return a :class:`SyncedObservation` if it completes a refresh."""
        time = float(time)
        self._apply(int(asset), time, float(price))
        return self._maybe_emit(time)

    def push_group(self, time: float, ticks):
        """Add several ticks sharing ``time``; ``ticks`` yields ``(asset, price)``.

        Applied in asset-index order; at most one observation is emitted.
        """
        time = float(time)
        for asset, price in sorted(ticks, key=lambda ap: ap[0]):
            self._apply(int(asset), time, float(price))
        return self._maybe_emit(time)


def merge_ticks(streams: Sequence[TickStream]) -> Iterator[tuple[float, list[tuple[int, float]]]]:
    """Yield ``(time, [(asset, price), ...])`` groups in global time order."""
    streams = _as_streams(streams)
    iters = [zip(s.times.tolist(), s.prices.tolist()) for s in streams]
    heap = []
    for k, it in enumerate(iters):
        first = next(it, None)
        if first is not None:
            heap.append((first[0], k, first[1]))
    heapq.heapify(heap)
    while heap:
        t, k, p = heapq.heappop(heap)
        group = [(k, p)]
        nxt = next(iters[k], None)
        if nxt is not None:
            heapq.heappush(heap, (nxt[0], k, nxt[1]))
        while heap and heap[0][0] == t:
            _, k2, p2 = heapq.heappop(heap)
            group.append((k2, p2))
            nxt = next(iters[k2], None)
            if nxt is not None:
                heapq.heappush(heap, (nxt[0], k2, nxt[1]))
        yield t, group


def iter_synchronized(groups: Iterable[tuple[float, list[tuple[int, float]]]], m: int) -> Iterator[SyncedObservation]:
    """Drive a :class:`SyncState` from time-ordered tick groups."""
    state = SyncState(m)
    for t, group in groups:
        obs = state.push_group(t, group)
        if obs is not None:
            yield obs


def replay(streams: Sequence[TickStream], allow_empty: bool = False) -> SyncedPanel:
    """Synchronize by replaying the ticks through :class:`SyncState`."""
    streams = _as_streams(streams)
    obs = list(iter_synchronized(merge_ticks(streams), len(streams)))
    if len(obs) < 2 and not allow_empty:
        raise NoReturnsError(f"only {len(obs)} refresh time(s); no returns can be formed")
    times = np.array([o.time for o in obs])
    prices = np.column_stack([o.prices for o in obs]) if obs else np.zeros((len(streams), 0))
    return SyncedPanel(times, prices)
