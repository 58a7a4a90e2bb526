"""Bias/RMSE aggregation and bandwidth sweeps over simulated days."""
from __future__ import annotations

import csv
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError
from .sim import ModelParams, day_rng, simulate_day
from .stream import EstimatorState, LagBank
from .sync import synchronize
from .weights import EstimatorKind, updating_vector

logger = logging.getLogger(__name__)

__all__ = [
    "evaluate",
    "default_bandwidths",
    "SweepResult",
    "ReplicationReport",
    "bandwidth_sweep",
    "best_bandwidth",
    "table_rows",
    "write_table_csv",
    "write_curves_csv",
]


def evaluate(estimates, truths):
    """Element-wise bias and RMSE of ``estimates`` against ``truths``.

    Returns ``(bias, rmse)``, each ``m x m``.
    """
    est = np.asarray(estimates, dtype=float)
    tru = np.asarray(truths, dtype=float)
    if est.shape[0] == 0 or tru.shape[0] == 0:
        raise ParameterError("need at least one estimate/truth pair")
    if est.shape != tru.shape or est.ndim != 3 or est.shape[1] != est.shape[2]:
        raise DimensionError(f"estimates {est.shape} and truths {tru.shape} must both be (N, m, m)")
    err = est - tru
    return err.mean(axis=0), np.sqrt((err**2).mean(axis=0))


def default_bandwidths(cap: int = 1000) -> list[int]:
    """Roughly geometric grid: 1..10, 12, 16, 20, 25, 32, ... up to ``cap``."""
    grid = list(range(1, 11)) + [12, 16, 20, 25, 32, 40, 50, 64, 80, 100, 128, 160, 200, 256, 320, 400, 500, 640, 800, 1000]
    return [h for h in grid if h <= cap]


def _pairs(kinds, h_values):
    out = []
    for kind in kinds:
        kind = EstimatorKind.parse(kind)
        if kind is EstimatorKind.RV:
            hs = sorted(set(h_values))
        else:
            hs = sorted(h for h in set(h_values) if h >= kind.min_bandwidth)
        out.extend((kind, h) for h in hs)
    return out


def _day_errors(args):
    params, pairs, seed, day, engine, backend = args
    sim_day = simulate_day(params, rng=day_rng(seed, day))
    panel = synchronize(sim_day.streams, backend=backend)
    Y = np.ascontiguousarray(panel.returns.T)
    m = Y.shape[1]
    est = np.empty((len(pairs), m, m))
    if engine == "bank":
        bank = LagBank(max(h for _, h in pairs), m, backend=backend)
        bank.update_block(Y)
        for i, (kind, h) in enumerate(pairs):
            # RV ignores h: (1, 0, ..., 0) has the same value as h = 1
            u = updating_vector(kind, 1 if kind is EstimatorKind.RV else h)
            est[i] = bank.estimate(u)
    elif engine == "states":
        for i, (kind, h) in enumerate(pairs):
            state = EstimatorState(updating_vector(kind, h), m, backend=backend)
            est[i] = state.update_block(Y).current()
    else:
        raise ParameterError(f"unknown engine {engine!r}")
    return est - sim_day.truth, sim_day.truth, panel.n


@dataclass
class SweepResult:
    """Per-(kind, h) bias and RMSE matrices from one scenario sweep."""

    scenario: str
    pairs: list
    bias: np.ndarray
    rmse: np.ndarray
    replications: int
    mean_refresh_count: float
    errors: np.ndarray = field(default=None, repr=False)
    truths: np.ndarray = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.bias.shape[-1]

    def curve(self, kind, element="qv1"):
        """``(h_values, bias, rmse)`` arrays for one kind and summary element."""
        kind = EstimatorKind.parse(kind)
        idx = [i for i, (k, _) in enumerate(self.pairs) if k is kind]
        hs = np.array([self.pairs[i][1] for i in idx])
        b, r = zip(*(self.summary(i, element) for i in idx)) if idx else ((), ())
        return hs, np.array(b), np.array(r)

    def summary(self, i: int, element: str):
        """Scalar ``(bias, rmse)`` for pair ``i``.

        ``qv1`` is asset 1's variance; ``qv_mean`` pools all diagonal
        elements; ``cov12`` is the first covariance; ``cov_mean`` pools all
        off-diagonal elements; ``"a-b"`` (1-based) picks an element.
        """
        err = self.errors[:, i] if self.errors is not None else None
        if element == "qv1":
            return self.bias[i, 0, 0], self.rmse[i, 0, 0]
        if element == "cov12":
            return self.bias[i, 0, 1], self.rmse[i, 0, 1]
        if element in ("qv_mean", "cov_mean"):
            m = self.m
            if element == "qv_mean":
                mask = np.eye(m, dtype=bool)
            else:
                mask = np.triu(np.ones((m, m), dtype=bool), 1)
            if not mask.any():
                return np.nan, np.nan
            if err is None:
                raise ParameterError("pooled summaries need per-day errors")
            e = err[:, mask]
            return e.mean(), np.sqrt((e**2).mean())
        a, b = (int(x) - 1 for x in element.split("-"))
        return self.bias[i, a, b], self.rmse[i, a, b]


def bandwidth_sweep(
    params: ModelParams,
    kinds,
    h_values,
    replications: int,
    seed: int = 0,
    scenario: str = "custom",
    engine: str = "bank",
    workers: int = 1,
    backend=None,
    keep_errors: bool = True,
) -> SweepResult:
    """Simulate ``replications`` days and score every (kind, h) on the same returns.

    ``engine="bank"`` derives all bandwidths from one set of streaming
    autocovariances per day; ``engine="states"`` runs one
    :class:`~streamqv.stream.EstimatorState` per (kind, h).  Both give the
    same numbers up to rounding.
    """
    replications = int(replications)
    if replications < 1:
        raise ParameterError(f"replications must be positive, got {replications}")
    pairs = _pairs(kinds, h_values)
    if not pairs:
        raise ParameterError("no (kind, bandwidth) pairs to evaluate")
    jobs = [(params, pairs, seed, d, engine, backend) for d in range(replications)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_day_errors, jobs, chunksize=4))
    else:
        results = [_day_errors(j) for j in jobs]
    errors = np.stack([r[0] for r in results])
    truths = np.stack([r[1] for r in results])
    counts = np.array([r[2] for r in results], dtype=float)
    bias = errors.mean(axis=0)
    rmse = np.sqrt((errors**2).mean(axis=0))
    logger.info("swept %s: %d days, %d pairs, mean n=%.1f", scenario, replications, len(pairs), counts.mean())
    return SweepResult(
        scenario,
        pairs,
        bias,
        rmse,
        replications,
        float(counts.mean()),
        errors if keep_errors else None,
        truths if keep_errors else None,
    )


def best_bandwidth(h_values, bias, rmse):
    """``(h*, bias, rmse)`` at the smallest RMSE; ties go to the smaller ``h``."""
    h = np.asarray(h_values)
    r = np.asarray(rmse, dtype=float)
    if h.size == 0:
        raise ParameterError("empty curve")
    order = np.lexsort((h, r))  # primary key rmse, secondary h
    i = order[0]
    return int(h[i]), float(np.asarray(bias)[i]), float(r[i])


@dataclass
class ReplicationReport:
    """One best-bandwidth table row: bandwidth, bias and RMSE per target for an estimator."""

    scenario: str
    kind: EstimatorKind
    replications: int
    qv1: tuple
    qv_mean: tuple
    cov12: tuple

    def as_row(self) -> dict:
        row = {"scenario": self.scenario, "method": self.kind.label, "replications": self.replications}
        for name, (h, b, r) in (("qv1", self.qv1), ("qv_mean", self.qv_mean), ("cov12", self.cov12)):
            row[f"{name}_band"] = h
            row[f"{name}_bias"] = b
            row[f"{name}_rmse"] = r
        return row


def table_rows(result: SweepResult, kinds=None) -> list[ReplicationReport]:
    if kinds is None:
        kinds = list(dict.fromkeys(k for k, _ in result.pairs))
    rows = []
    for kind in kinds:
        kind = EstimatorKind.parse(kind)
        picks = []
        for element in ("qv1", "qv_mean", "cov12"):
            hs, b, r = result.curve(kind, element)
            if hs.size == 0:
                picks.append((0, np.nan, np.nan))
            elif np.all(np.isnan(r)):
                picks.append((int(hs[0]), np.nan, np.nan))
            elif kind is EstimatorKind.RV:
                picks.append((1, float(b[0]), float(r[0])))
            else:
                picks.append(best_bandwidth(hs, b, r))
        rows.append(ReplicationReport(result.scenario, kind, result.replications, *picks))
    return rows


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_table_csv(rows, path_or_file) -> None:
    """Best-bandwidth table as CSV: one row per scenario x method."""
    dicts = [r.as_row() for r in rows]
    if not dicts:
        return
    _write_csv(path_or_file, list(dicts[0]), ([_fmt(d[k]) for k in dicts[0]] for d in dicts))


def write_curves_csv(result: SweepResult, path_or_file, header: bool = True) -> None:
    """Long-format curves: scenario, kind, h, element, bias, rmse."""
    m = result.m
    elements = [f"{a + 1}-{b + 1}" for a in range(m) for b in range(a, m)] + ["qv_mean", "cov_mean"]

    def rows():
        for i, (kind, h) in enumerate(result.pairs):
            for el in elements:
                b, r = result.summary(i, el)
                if np.isnan(r):
                    continue
                yield [result.scenario, kind.label, h, el, _fmt(b), _fmt(r)]

    _write_csv(path_or_file, ["scenario", "kind", "h", "element", "bias", "rmse"] if header else None, rows())


def _write_csv(path_or_file, header, rows):
    if not hasattr(path_or_file, "write"):
        with open(path_or_file, "w", newline="") as fh:
            return _write_csv(fh, header, rows)
    writer = csv.writer(path_or_file)
    if header is not None:
        writer.writerow(header)
    writer.writerows(rows)
