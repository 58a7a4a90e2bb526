"""On-demand verification of the streaming engine against the dense oracle."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import oracle
from .errors import ParameterError
from .stream import EstimatorState
from .weights import NOISE_ROBUST_KINDS, EstimatorKind, UpdatingVector, updating_vector

__all__ = ["CheckResult", "relative_frobenius", "corner_mask", "run_oracle_suite"]

REL_TOL = 1e-10
ENTRY_TOL = 1e-12


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name} {self.detail}".rstrip()


def relative_frobenius(a, b) -> float:
    """``|a - b|_F / |b|_F`` (absolute error when ``b`` is zero)."""
    a, b = np.asarray(a), np.asarray(b)
    denom = np.linalg.norm(b)
    diff = np.linalg.norm(a - b)
    return float(diff / denom) if denom > 0 else float(diff)


def corner_mask(n: int, h: int) -> np.ndarray:
    """True on the upper-left and lower-right ``(h-1) x (h-1)`` corners."""
    mask = np.zeros((n, n), dtype=bool)
    c = h - 1
    if c > 0:
        mask[:c, :c] = True
        mask[n - c :, n - c :] = True
    return mask


def _stream_value(u: UpdatingVector, Y) -> np.ndarray:
    state = EstimatorState(u, Y.shape[0])
    for y in Y.T:
        state.update(y)
    return state.current()


def run_oracle_suite(
    kinds=NOISE_ROBUST_KINDS,
    h_values=(2, 4, 8, 16),
    m_values=(1, 2, 3),
    n: int = 200,
    seed: int = 0,
    corrupt: bool = False,
) -> list[CheckResult]:
    """Streaming/banded equivalence, definition/weight-matrix duality and
    interior-Toeplitz checks.

    ``corrupt`` perturbs each streaming updating vector (negative control);
    the streaming checks must then fail.
    """
    n = int(n)
    kinds = [EstimatorKind.parse(k) for k in kinds]
    for h in h_values:
        if n < h:
            raise ParameterError(f"need n >= h, got n={n}, h={h}")
    rng = np.random.default_rng(seed)
    results = []
    for kind in kinds:
        for h in h_values:
            if h < kind.min_bandwidth:
                continue
            u = updating_vector(kind, h)
            u_stream = u
            if corrupt:
                bad = u.u.copy()
                bad[-1] += 1e-3
                u_stream = UpdatingVector(kind, h, bad)
            W_band = oracle.banded_weight_matrix(u, n).W
            for m in m_values:
                Y = rng.standard_normal((m, n))
                err = relative_frobenius(_stream_value(u_stream, Y), oracle.quadratic_form(Y, W_band))
                results.append(CheckResult(f"stream[{kind.value},h={h},m={m}]", err <= REL_TOL, f"rel={err:.3e}"))
            W_full = oracle.weight_matrix(kind, n, h=h).W
            Y = rng.standard_normal((2, n))
            err = relative_frobenius(oracle.batch_estimate(kind, Y, h), oracle.quadratic_form(Y, W_full))
            results.append(CheckResult(f"duality[{kind.value},h={h}]", err <= REL_TOL, f"rel={err:.3e}"))
            off = np.abs(W_full - W_band) > ENTRY_TOL
            interior_ok = not off[h - 1 : n - h + 1].any()
            corners_ok = not (off & ~corner_mask(n, h)).any()
            results.append(
                CheckResult(
                    f"interior[{kind.value},h={h}]",
                    interior_ok and corners_ok,
                    f"deviating entries={int(off.sum())}",
                )
            )
    return results
