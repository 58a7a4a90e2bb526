# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.  Signatures mirror ``_pykernels`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, free

cnp.import_array()


def banded_update(double[:, ::1] acc, double[:, ::1] ring, Py_ssize_t head,
                  Py_ssize_t count, const double[::1] u, const double[:, ::1] Y):
    """Feed the rows of ``Y`` through the banded recursion.

    Only the upper triangle of ``acc`` is accumulated; it is mirrored before
    returning.  Returns the new ``(head, count)``.
    """
    cdef Py_ssize_t n = Y.shape[0]
    cdef Py_ssize_t m = Y.shape[1]
    cdef Py_ssize_t cap = ring.shape[0]
    cdef Py_ssize_t r, j, a, b, lags, slot
    cdef double u0 = u[0]
    cdef double ya, za
    cdef double *z = <double *> malloc(m * sizeof(double))
    if z == NULL:
        raise MemoryError()
    try:
        for r in range(n):
            for a in range(m):
                z[a] = 0.0
            lags = count if count < cap else cap
            for j in range(1, lags + 1):
                slot = head - j
                if slot < 0:
                    slot += cap
                for a in range(m):
                    z[a] += u[j] * ring[slot, a]
            for a in range(m):
                ya = Y[r, a]
                za = z[a]
                for b in range(a, m):
                    acc[a, b] += u0 * ya * Y[r, b] + ya * z[b] + za * Y[r, b]
            if cap > 0:
                for a in range(m):
                    ring[head, a] = Y[r, a]
                head += 1
                if head == cap:
                    head = 0
            count += 1
        for a in range(m):
            for b in range(a + 1, m):
                acc[b, a] = acc[a, b]
    finally:
        free(z)
    return head, count


def lag_update(double[:, :, ::1] lags_acc, double[:, ::1] ring, Py_ssize_t head,
               Py_ssize_t count, const double[:, ::1] Y):
    """Accumulate realized autocovariances ``RA_j += y_i y_{i-j}'`` for all stored lags.

    ``lags_acc`` has shape ``(H, m, m)`` and ``ring`` holds ``H - 1`` rows.
    """
    cdef Py_ssize_t n = Y.shape[0]
    cdef Py_ssize_t m = Y.shape[1]
    cdef Py_ssize_t cap = ring.shape[0]
    cdef Py_ssize_t r, j, a, b, nlags, slot
    cdef double ya
    for r in range(n):
        for a in range(m):
            ya = Y[r, a]
            for b in range(m):
                lags_acc[0, a, b] += ya * Y[r, b]
        nlags = count if count < cap else cap
        for j in range(1, nlags + 1):
            slot = head - j
            if slot < 0:
                slot += cap
            for a in range(m):
                ya = Y[r, a]
                for b in range(m):
                    lags_acc[j, a, b] += ya * ring[slot, b]
        if cap > 0:
            for a in range(m):
                ring[head, a] = Y[r, a]
            head += 1
            if head == cap:
                head = 0
        count += 1
    return head, count


def refresh_times(const double[::1] times, const Py_ssize_t[::1] offsets):
    """Refresh times of ``m`` tick-time arrays packed back to back.

    Asset ``k`` owns ``times[offsets[k]:offsets[k + 1]]``; every slice must be
    non-empty and strictly increasing.
    """
    cdef Py_ssize_t m = offsets.shape[0] - 1
    cdef Py_ssize_t k, total = times.shape[0]
    cdef double prev, cand, t
    cdef Py_ssize_t *ptr = <Py_ssize_t *> malloc(m * sizeof(Py_ssize_t))
    if ptr == NULL:
        raise MemoryError()
    out = np.empty(total, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t n_out = 0
    try:
        prev = times[offsets[0]]
        for k in range(m):
            ptr[k] = offsets[k]
            if times[offsets[k]] > prev:
                prev = times[offsets[k]]
        out_v[0] = prev
        n_out = 1
        while True:
            cand = prev
            for k in range(m):
                while ptr[k] < offsets[k + 1] and times[ptr[k]] <= prev:
                    ptr[k] += 1
                if ptr[k] == offsets[k + 1]:
                    return out[:n_out].copy()
                # every candidate lies strictly after prev, so max() starting at prev is exact
                t = times[ptr[k]]
                if t > cand:
                    cand = t
            out_v[n_out] = cand
            n_out += 1
            prev = cand
    finally:
        free(ptr)
