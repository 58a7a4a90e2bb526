"""Kernel/weight functions and the closed-form updating vectors.

Every estimator handled by the streaming engine is a symmetric banded
quadratic form in the synchronized returns.  The band is described by the
updating vector ``u = (u_0, ..., u_{h-1})``: ``u_j`` multiplies every pair of
returns that are ``j`` steps apart.  This module computes ``u`` for each
supported estimator once, so the per-return cost never involves a kernel call.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import BandwidthError, ParameterError

__all__ = [
    "EstimatorKind",
    "UpdatingVector",
    "kernel_th2",
    "kernel_parzen",
    "weight_g",
    "msw_a",
    "psi1",
    "psi2",
    "updating_vector",
    "arv_updating_vector",
]


class EstimatorKind(str, enum.Enum):
    """Supported estimators."""

    RV = "RV"
    MSE = "MSE"
    RKE = "RKE"
    PD_RKE = "PD_RKE"
    PAE = "PAE"
    PD_PAE = "PD_PAE"

    @classmethod
    def parse(cls, value) -> "EstimatorKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().upper().replace("-", "_")
        try:
            return cls(key)
        except ValueError:
            names = ", ".join(k.value for k in cls)
            raise ParameterError(f"unknown estimator kind {value!r}; expected one of {names}") from None

    @property
    def label(self) -> str:
        return self.value.replace("_", "-")

    @property
    def min_bandwidth(self) -> int:
        return 1 if self is EstimatorKind.RV else 2


NOISE_ROBUST_KINDS = (
    EstimatorKind.MSE,
    EstimatorKind.RKE,
    EstimatorKind.PD_RKE,
    EstimatorKind.PAE,
    EstimatorKind.PD_PAE,
)


def _check_unit(x):
    arr = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ParameterError(f"kernel argument must lie in [0, 1], got {x!r}")
    return arr


def _scalar_or_array(arr):
    return float(arr) if arr.ndim == 0 else arr


def kernel_th2(x):
    """Modified Tukey-Hanning kernel of order 2, ``sin^2(pi/2 * (1 - x)^2)``."""
    arr = _check_unit(x)
    return _scalar_or_array(np.sin(0.5 * np.pi * (1.0 - arr) ** 2) ** 2)


def kernel_parzen(x):
    """Parzen kernel on [0, 1]."""
    arr = _check_unit(x)
    out = np.where(arr < 0.5, 1.0 - 6.0 * arr**2 + 6.0 * arr**3, 2.0 * (1.0 - arr) ** 3)
    return _scalar_or_array(out)


def weight_g(x):
    """Triangular pre-averaging weight ``min(x, 1 - x)``."""
    arr = _check_unit(x)
    return _scalar_or_array(np.minimum(arr, 1.0 - arr))


def msw_a(s, h: int) -> float:
    """Multi-scale weight ``A(s, h)`` attached to the average RV at scale ``s``.

    The weights sum to one over ``s = 1..h``.
    """
    h = int(h)
    if h < 2:
        raise BandwidthError(f"multi-scale weights need h >= 2, got {h}")
    s_arr = np.asarray(s)
    if np.any(s_arr < 1) or np.any(s_arr > h):
        raise ParameterError(f"scale s must lie in 1..{h}, got {s!r}")
    s_arr = s_arr.astype(float)
    out = 12.0 * s_arr**2 / (h**3 - h) - 6.0 * s_arr / (h**2 - h)
    return _scalar_or_array(out)


def _g_knots(h: int) -> np.ndarray:
    # G evaluated at j / (h + 1) for j = 0..h+1
    return weight_g(np.arange(h + 2) / (h + 1))


def psi1(h: int) -> float:
    """Sum of squared increments of the pre-averaging weights."""
    h = _check_pae_bandwidth(h)
    return float(np.sum(np.diff(_g_knots(h)) ** 2))


def psi2(h: int) -> float:
    """Sum of squared pre-averaging weights."""
    h = _check_pae_bandwidth(h)
    return float(np.sum(_g_knots(h)[1 : h + 1] ** 2))


def _check_pae_bandwidth(h) -> int:
    h = int(h)
    if h < 2:
        raise BandwidthError(f"pre-averaging needs h >= 2, got {h}")
    return h


def _g_autocorrelation(h: int) -> np.ndarray:
    """``c_i = sum_{j=0}^{h-1-i} g_j g_{j+i}`` with ``g_j = G((j+1)/(h+1))``."""
    g = _g_knots(h)[1 : h + 1]
    return np.array([np.dot(g[: h - i], g[i:]) for i in range(h)])


@dataclass(frozen=True)
class UpdatingVector:
    """Coefficients ``u_0..u_{h-1}`` of a banded symmetric weight matrix.

    ``u`` is stored as a read-only float64 array; instances are immutable and
    safe to share between estimator states and threads.
    """

    kind: EstimatorKind
    h: int
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.u, dtype=np.float64).reshape(-1)
        if arr.size != self.h:
            raise ParameterError(f"updating vector has length {arr.size}, expected h={self.h}")
        arr.setflags(write=False)
        object.__setattr__(self, "u", arr)

    def __len__(self):
        return self.h

    def __eq__(self, other):
        if not isinstance(other, UpdatingVector):
            return NotImplemented
        return self.kind == other.kind and self.h == other.h and np.array_equal(self.u, other.u)

    def __hash__(self):
        return hash((self.kind, self.h, self.u.tobytes()))

    @classmethod
    def custom(cls, u, kind: EstimatorKind = EstimatorKind.RV) -> "UpdatingVector":
        """Wrap arbitrary coefficients (used for negative controls and experiments)."""
        arr = np.asarray(u, dtype=float).reshape(-1)
        return cls(kind, arr.size, arr)


def arv_updating_vector(s: int) -> np.ndarray:
    """Interior band of the average realized covariance at sampling interval ``s``."""
    s = int(s)
    if s < 1:
        raise ParameterError(f"sampling interval must be >= 1, got {s}")
    i = np.arange(s)
    return (s - i) / s


def _u_mse(h: int) -> np.ndarray:
    a = msw_a(np.arange(1, h + 1), h)
    s = np.arange(1, h + 1, dtype=float)
    u = np.empty(h)
    for i in range(h):
        tail = slice(i, h)  # s = i+1..h
        u[i] = np.sum((s[tail] - i) / s[tail] * a[tail])
    return u


def _u_rke(h: int) -> np.ndarray:
    u = np.empty(h)
    u[0] = 1.0
    u[1:] = kernel_th2((np.arange(1, h) - 1) / (h - 1))
    return u


def _u_pd_rke(h: int) -> np.ndarray:
    return np.asarray(kernel_parzen(np.arange(h) / h), dtype=float)


def _u_pd_pae(h: int) -> np.ndarray:
    return _g_autocorrelation(h) / psi2(h)


def _u_pae(h: int) -> np.ndarray:
    u = _u_pd_pae(h)
    u[0] -= psi1(h) / (2.0 * psi2(h))
    return u


_BUILDERS = {
    EstimatorKind.MSE: _u_mse,
    EstimatorKind.RKE: _u_rke,
    EstimatorKind.PD_RKE: _u_pd_rke,
    EstimatorKind.PAE: _u_pae,
    EstimatorKind.PD_PAE: _u_pd_pae,
}


@lru_cache(maxsize=4096)
def _cached(kind: EstimatorKind, h: int) -> UpdatingVector:
    if kind is EstimatorKind.RV:
        u = np.zeros(h)
        u[0] = 1.0
    else:
        u = _BUILDERS[kind](h)
    return UpdatingVector(kind, h, u)


def updating_vector(kind, h: int) -> UpdatingVector:
    """Updating vector of estimator ``kind`` with bandwidth ``h``.

    Raises
    ------
    BandwidthError
        If ``h`` is below the estimator's minimum (1 for RV, 2 otherwise).
    """
    kind = EstimatorKind.parse(kind)
    if int(h) != h:
        raise ParameterError(f"bandwidth must be an integer, got {h!r}")
    h = int(h)
    if h < kind.min_bandwidth:
        raise BandwidthError(f"{kind.label} needs bandwidth h >= {kind.min_bandwidth}, got {h}")
    return _cached(kind, h)
