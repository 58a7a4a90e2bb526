"""Dense batch reference implementations.

Two independent routes to every estimator:

* the original definitions (sparse/average RV, realized autocovariances,
  kernel sums, pre-averaged returns), and
* quadratic forms ``Y W Y'`` with the full ``n x n`` weight matrices,
  including edge effects.

Both are O(n^2) in memory and meant for verification at test scale; the
streaming engine in :mod:`streamqv.stream` is the production path.

Return matrices follow the ``m x n`` convention here (rows are assets,
columns are time), unlike the row-per-return convention of the streaming
API.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import BandwidthError, DimensionError, ParameterError
from .weights import (
    EstimatorKind,
    UpdatingVector,
    kernel_parzen,
    kernel_th2,
    msw_a,
    psi1,
    psi2,
    weight_g,
)

__all__ = [
    "WeightMatrix",
    "weight_matrix",
    "banded_weight_matrix",
    "difference_matrix",
    "price_weight_matrix",
    "quadratic_form",
    "price_quadratic_form",
    "realized_covariance",
    "realized_autocov",
    "sparse_rv",
    "average_rv",
    "mse",
    "rke",
    "pd_rke",
    "pre_averaged_returns",
    "pae",
    "pd_pae",
    "batch_estimate",
    "dump_weight_matrix",
]


@dataclass(frozen=True)
class WeightMatrix:
    kind: str
    n: int
    params: dict = field(default_factory=dict)
    W: np.ndarray = field(default=None, repr=False)

    def __array__(self, dtype=None, copy=None):
        return self.W if dtype is None else self.W.astype(dtype)


def _check_returns(Y):
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y.reshape(1, -1)
    if Y.ndim != 2:
        raise DimensionError(f"return matrix must be m x n, got shape {Y.shape}")
    return Y


def _check_h(h, n, minimum=2):
    h = int(h)
    if h < minimum:
        raise BandwidthError(f"bandwidth must be >= {minimum}, got {h}")
    if n < h:
        raise ParameterError(f"need n >= h, got n={n}, h={h}")
    return h


# -- weight matrices -----------------------------------------------------


def _w_srv(n, l, s):
    W = np.zeros((n, n))
    for k in range(1, (n - l) // s + 1):
        lo = (k - 1) * s + l  # 0-based start of the k-th block
        W[lo : lo + s, lo : lo + s] = 1.0
    return W


def _w_arv(n, s):
    W = np.zeros((n, n))
    for l in range(s):
        W += _w_srv(n, l, s)
    return W / s


def _w_mse(n, h):
    W = np.zeros((n, n))
    for s in range(1, h + 1):
        W += msw_a(s, h) * _w_arv(n, s)
    return W


def _lags(n):
    idx = np.arange(n)
    return np.abs(idx[:, None] - idx[None, :])


def _w_rke(n, h):
    d = _lags(n)
    W = np.zeros((n, n))
    band = (d >= 1) & (d < h)
    W[band] = kernel_th2((d[band] - 1) / (h - 1))
    W[d == 0] = 1.0
    return W


def _w_pd_rke(n, h):
    d = _lags(n)
    W = np.zeros((n, n))
    band = d < h
    W[band] = kernel_parzen(d[band] / h)
    return W


def _w_pre(n, h, literal_clamp=False):
    """Pre-averaging weights without the bias correction term.

    Entry ``(i, j)`` (1-based) sums ``g_k g_{k+|i-j|}`` over the windows that
    contain both returns, ``g_k = G((k+1)/(h+1))``.  The lower summation limit
    is ``max(0, min(i, j) + h - n - 1)``; ``literal_clamp`` uses
    ``max(i, j)`` instead, which drops terms in the lower-right corner.
    """
    g = weight_g(np.arange(1, h + 1) / (h + 1))
    W = np.zeros((n, n))
    for i in range(1, n + 1):
        for j in range(max(1, i - h + 1), min(n, i + h - 1) + 1):
            d = abs(i - j)
            edge = max(i, j) if literal_clamp else min(i, j)
            lo = max(0, edge + h - n - 1)
            hi = min(h - 1 - d, i - 1, j - 1)
            if hi >= lo:
                k = np.arange(lo, hi + 1)
                W[i - 1, j - 1] = np.dot(g[k], g[k + d])
    return W / psi2(h)


def _w_pae(n, h, literal_clamp=False):
    W = _w_pre(n, h, literal_clamp)
    W[np.diag_indices(n)] -= psi1(h) / (2.0 * psi2(h))
    return W


def weight_matrix(kind, n: int, h=None, l=None, s=None, literal_clamp=False) -> WeightMatrix:
    """Full weight matrix of an estimator, edge effects included.

    ``kind`` is an :class:`EstimatorKind` or one of ``"SRV"`` (needs ``l``,
    ``s``) and ``"ARV"`` (needs ``s``).
    """
    n = int(n)
    if n < 1:
        raise ParameterError(f"n must be positive, got {n}")
    name = str(getattr(kind, "value", kind)).upper().replace("-", "_")
    if name == "SRV":
        if l is None or s is None:
            raise ParameterError("SRV needs l and s")
        l, s = int(l), int(s)
        if not (0 <= l < s <= n):
            raise ParameterError(f"SRV needs 0 <= l < s <= n, got l={l}, s={s}, n={n}")
        return WeightMatrix("SRV", n, {"l": l, "s": s}, _w_srv(n, l, s))
    if name == "ARV":
        if s is None or not (1 <= int(s) <= n):
            raise ParameterError(f"ARV needs 1 <= s <= n, got s={s}")
        return WeightMatrix("ARV", n, {"s": int(s)}, _w_arv(n, int(s)))
    kind = EstimatorKind.parse(name)
    if kind is EstimatorKind.RV:
        return WeightMatrix(kind.value, n, {}, np.eye(n))
    if h is None:
        raise ParameterError(f"{kind.label} needs a bandwidth h")
    h = _check_h(h, n)
    if kind is EstimatorKind.MSE:
        W = _w_mse(n, h)
    elif kind is EstimatorKind.RKE:
        W = _w_rke(n, h)
    elif kind is EstimatorKind.PD_RKE:
        W = _w_pd_rke(n, h)
    elif kind is EstimatorKind.PAE:
        W = _w_pae(n, h, literal_clamp)
    else:
        W = _w_pre(n, h, literal_clamp)
    return WeightMatrix(kind.value, n, {"h": h}, W)


def banded_weight_matrix(u: UpdatingVector, n: int) -> WeightMatrix:
    """Symmetric Toeplitz band ``w_ij = u_|i-j|`` for ``|i-j| < h``, no edge effects."""
    n = int(n)
    coef = np.asarray(u.u)
    d = _lags(n)
    W = np.zeros((n, n))
    band = d < coef.size
    W[band] = coef[d[band]]
    return WeightMatrix(f"banded-{u.kind.value}", n, {"h": u.h}, W)


def difference_matrix(n: int) -> np.ndarray:
    """``n x (n+1)`` first-difference map ``F`` with ``Y = X F'``."""
    F = np.zeros((n, n + 1))
    r = np.arange(n)
    F[r, r] = -1.0
    F[r, r + 1] = 1.0
    return F


def price_weight_matrix(W) -> np.ndarray:
    """``V = F' W F``, the weights of the same estimator written in prices."""
    W = np.asarray(W)
    F = difference_matrix(W.shape[0])
    return F.T @ W @ F


# -- quadratic forms -----------------------------------------------------


def quadratic_form(Y, W) -> np.ndarray:
    """``Y W Y'`` for an ``m x n`` return matrix."""
    Y = _check_returns(Y)
    W = np.asarray(W, dtype=float)
    if W.shape != (Y.shape[1], Y.shape[1]):
        raise DimensionError(f"weight matrix {W.shape} does not match n={Y.shape[1]}")
    return Y @ W @ Y.T


def price_quadratic_form(X, V) -> np.ndarray:
    """``X V X'`` for an ``m x (n+1)`` price matrix."""
    X = _check_returns(X)
    V = np.asarray(V, dtype=float)
    if V.shape != (X.shape[1], X.shape[1]):
        raise DimensionError(f"price weight matrix {V.shape} does not match n+1={X.shape[1]}")
    return X @ V @ X.T


# -- estimator definitions ----------------------------------------------


def realized_covariance(Y) -> np.ndarray:
    Y = _check_returns(Y)
    return Y @ Y.T


def realized_autocov(Y, lag: int) -> np.ndarray:
    """``sum_{i>lag} Y_i Y_{i-lag}'``; negative lags give the transpose."""
    Y = _check_returns(Y)
    n = Y.shape[1]
    l = abs(int(lag))
    if l >= n:
        return np.zeros((Y.shape[0], Y.shape[0]))
    ra = Y[:, l:] @ Y[:, : n - l].T
    return ra.T if lag < 0 else ra


def sparse_rv(Y, l: int, s: int) -> np.ndarray:
    """Realized covariance on the subgrid starting ``l`` steps in, every ``s`` steps."""
    Y = _check_returns(Y)
    m, n = Y.shape
    l, s = int(l), int(s)
    if not (0 <= l < s <= n):
        raise ParameterError(f"need 0 <= l < s <= n, got l={l}, s={s}, n={n}")
    out = np.zeros((m, m))
    for k in range(1, (n - l) // s + 1):
        lo = (k - 1) * s + l
        v = Y[:, lo : lo + s].sum(axis=1)
        out += np.outer(v, v)
    return out


def average_rv(Y, s: int) -> np.ndarray:
    s = int(s)
    return sum(sparse_rv(Y, l, s) for l in range(s)) / s


def mse(Y, h: int) -> np.ndarray:
    """Multi-scale estimator: ``sum_s A(s, h) ARV_s``."""
    Y = _check_returns(Y)
    h = _check_h(h, Y.shape[1])
    return sum(msw_a(s, h) * average_rv(Y, s) for s in range(1, h + 1))


def rke(Y, h: int) -> np.ndarray:
    """Flat-top realized kernel with the Tukey-Hanning(2) kernel."""
    Y = _check_returns(Y)
    h = _check_h(h, Y.shape[1])
    out = realized_covariance(Y)
    for j in range(1, h):
        out = out + kernel_th2((j - 1) / (h - 1)) * (realized_autocov(Y, j) + realized_autocov(Y, -j))
    return out


def pd_rke(Y, h: int) -> np.ndarray:
    """Non-flat-top realized kernel with the Parzen kernel."""
    Y = _check_returns(Y)
    h = _check_h(h, Y.shape[1])
    return sum(kernel_parzen(abs(j) / h) * realized_autocov(Y, j) for j in range(-h + 1, h))


def pre_averaged_returns(Y, h: int) -> np.ndarray:
    """``m x (n-h+1)`` matrix of ``sum_j G((j+1)/(h+1)) Y_{i+j}``."""
    Y = _check_returns(Y)
    n = Y.shape[1]
    h = _check_h(h, n)
    g = weight_g(np.arange(1, h + 1) / (h + 1))
    cols = n - h + 1
    out = np.zeros((Y.shape[0], cols))
    for j in range(h):
        out += g[j] * Y[:, j : j + cols]
    return out


def pd_pae(Y, h: int) -> np.ndarray:
    """Modulated realized covariance (pre-averaging without bias correction)."""
    Ybar = pre_averaged_returns(Y, h)
    return Ybar @ Ybar.T / psi2(h)


def pae(Y, h: int) -> np.ndarray:
    """Pre-averaging estimator with the realized-covariance bias correction."""
    return pd_pae(Y, h) - psi1(h) / (2.0 * psi2(h)) * realized_covariance(Y)


_DEFINITIONS = {
    EstimatorKind.MSE: mse,
    EstimatorKind.RKE: rke,
    EstimatorKind.PD_RKE: pd_rke,
    EstimatorKind.PAE: pae,
    EstimatorKind.PD_PAE: pd_pae,
}


def batch_estimate(kind, Y, h: int = 1) -> np.ndarray:
    """Estimator ``kind`` on ``Y`` from its original definition, edge effects included."""
    kind = EstimatorKind.parse(kind)
    if kind is EstimatorKind.RV:
        return realized_covariance(Y)
    return _DEFINITIONS[kind](Y, h)


def dump_weight_matrix(W, path) -> None:
    """Write a weight matrix as plain CSV (one row per line, 17 significant digits)."""
    W = np.asarray(W)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in W:
            writer.writerow([f"{v:.17g}" for v in row])
