"""Pure NumPy versions of the compiled kernels in ``_kernels.pyx``.

The semantics (argument layout, in-place mutation, return values) are
identical, so either module can back :mod:`streamqv._backend`.
"""
from __future__ import annotations

import numpy as np


def _ordered_ring(ring, head, count):
    cap = ring.shape[0]
    filled = min(cap, count)
    if filled == 0:
        return ring[:0]
    idx = (head - filled + np.arange(filled)) % cap
    return ring[idx]


def banded_update(acc, ring, head, count, u, Y):
    """Vectorized block form of the banded recursion.

    For row ``i`` of the block, the lagged sum ``z_i = sum_j u_j y_{i-j}`` is
    formed for all rows at once, after which the block contributes
    ``u_0 Y'Y + Y'Z + Z'Y``.
    """
    n, m = Y.shape
    if n == 0:
        return head, count
    cap = ring.shape[0]
    prev = _ordered_ring(ring, head, count)
    p = prev.shape[0]
    full = np.concatenate([prev, Y]) if p else Y
    zsum = np.zeros_like(Y)
    for j in range(1, cap + 1):
        first = max(0, j - p)  # rows whose lag-j partner exists
        if first >= n:
            break
        zsum[first:] += u[j] * full[p + first - j : p + n - j]
    block = u[0] * (Y.T @ Y)
    cross = Y.T @ zsum
    block += cross + cross.T
    acc += np.triu(block)
    upper = np.triu(acc, 1)
    acc[...] = np.triu(acc) + upper.T
    head = _push_rows(ring, head, Y)
    return head, count + n


def lag_update(lags_acc, ring, head, count, Y):
    """Accumulate ``RA_j += sum_i y_i y_{i-j}'`` for ``j = 0..H-1``."""
    n, m = Y.shape
    if n == 0:
        return head, count
    cap = ring.shape[0]
    prev = _ordered_ring(ring, head, count)
    p = prev.shape[0]
    full = np.concatenate([prev, Y]) if p else Y
    lags_acc[0] += Y.T @ Y
    for j in range(1, cap + 1):
        first = max(0, j - p)
        if first >= n:
            break
        lags_acc[j] += Y[first:].T @ full[p + first - j : p + n - j]
    head = _push_rows(ring, head, Y)
    return head, count + n


def _push_rows(ring, head, Y):
    cap = ring.shape[0]
    if cap == 0:
        return head
    n = Y.shape[0]
    keep = min(cap, n)
    start = head + (n - keep)  # slot of the first retained row
    slots = (start + np.arange(keep)) % cap
    ring[slots] = Y[n - keep :]
    return int((head + n) % cap)


def refresh_times(times, offsets):
    """Refresh times of ``m`` packed tick-time arrays (see the compiled twin)."""
    m = offsets.shape[0] - 1
    streams = [times[offsets[k] : offsets[k + 1]] for k in range(m)]
    prev = max(float(s[0]) for s in streams)
    out = [prev]
    while True:
        cand = prev
        for k, s in enumerate(streams):
            i = int(np.searchsorted(s, prev, side="right"))
            if i == s.shape[0]:
                return np.asarray(out, dtype=np.float64)
            if s[i] > cand:
                cand = float(s[i])
        out.append(cand)
        prev = cand
