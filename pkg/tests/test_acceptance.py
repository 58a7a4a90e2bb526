"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v`` (the PASS/FAIL lines
appear in the terminal summary) or ``python tests/test_acceptance.py``.

Monte Carlo criteria use a single master seed fixed before any result was
seen; nothing here is tuned to a particular draw.
"""
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from streamqv import oracle
from streamqv.checks import corner_mask
from streamqv.metrics import bandwidth_sweep, best_bandwidth, default_bandwidths
from streamqv.sim import ModelParams, day_rng, expected_refresh_count, scenario, simulate_day
from streamqv.stream import EstimatorState
from streamqv.sync import SyncState, TickStream, iter_synchronized, merge_ticks, refresh_times, synchronize
from streamqv.weights import (
    NOISE_ROBUST_KINDS,
    EstimatorKind,
    kernel_parzen,
    kernel_th2,
    msw_a,
    psi1,
    psi2,
    updating_vector,
)

SEED = 20190101
SWEEP_H = sorted(set(default_bandwidths(1000)) | {13})
REPLICATIONS = 200
HIGH_REPLICATIONS = 50
KINDS = list(EstimatorKind)

REPORT = {}


def record(number, title, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {title}" + (f" [{detail}]" if detail else "")
    REPORT[number] = line
    print(line)
    assert ok, line


def rel(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


@lru_cache(maxsize=None)
def sweep(noise, frequency, replications=REPLICATIONS):
    return bandwidth_sweep(
        scenario(noise, frequency), KINDS, SWEEP_H, replications, seed=SEED, scenario=f"{noise}/{frequency}"
    )


def best(res, kind, element="qv1"):
    return best_bandwidth(*res.curve(kind, element))


def at(res, kind, h, element="qv1"):
    hs, b, r = res.curve(kind, element)
    i = int(np.flatnonzero(hs == h)[0])
    return float(b[i]), float(r[i])


# -- 1 ------------------------------------------------------------------


def test_criterion_01_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for kind in NOISE_ROBUST_KINDS:
        for h in (2, 4, 8, 16):
            u = updating_vector(kind, h)
            W = oracle.banded_weight_matrix(u, 200).W
            for m in (1, 2, 3):
                Y = rng.standard_normal((m, 200))
                st = EstimatorState(u, m)
                for y in Y.T:
                    st.update(y)
                worst = max(worst, rel(st.current(), oracle.quadratic_form(Y, W)))
    elapsed = time.perf_counter() - t0
    record(1, "streaming == banded quadratic form", worst <= 1e-10 and elapsed < 10,
           f"max rel={worst:.2e}, {elapsed:.2f}s")


# -- 2 ------------------------------------------------------------------


def test_criterion_02_definition_duality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED + 2)
    worst = 0.0
    hs = (2, 4, 8, 16)
    for kind in NOISE_ROBUST_KINDS:
        mats = {h: oracle.weight_matrix(kind, 100, h=h).W for h in hs}
        for i in range(50):
            h = hs[i % len(hs)]
            Y = rng.standard_normal((2, 100))
            worst = max(worst, rel(oracle.batch_estimate(kind, Y, h), oracle.quadratic_form(Y, mats[h])))
    elapsed = time.perf_counter() - t0
    record(2, "definitions == full weight-matrix forms", worst <= 1e-10 and elapsed < 30,
           f"max rel={worst:.2e}, {elapsed:.2f}s")


# -- 3 ------------------------------------------------------------------


def test_criterion_03_edge_effect_taxonomy():
    n, h = 64, 8
    notes = []
    ok = True
    corners = corner_mask(n, h)
    for kind in NOISE_ROBUST_KINDS:
        W = oracle.weight_matrix(kind, n, h=h).W
        B = oracle.banded_weight_matrix(updating_vector(kind, h), n).W
        diff = W != B
        if kind in (EstimatorKind.RKE, EstimatorKind.PD_RKE):
            good = not diff.any()
        else:
            good = diff.any() and not (diff & ~corners).any()
        notes.append(f"{kind.label}:{int(diff.sum())}")
        ok &= bool(good)
    record(3, "edge effects only in (h-1)x(h-1) corners", ok, "differing entries " + ", ".join(notes))


# -- 4 ------------------------------------------------------------------


def test_criterion_04_analytic_anchors():
    sums = max(abs(math.fsum(msw_a(s, h) for s in range(1, h + 1)) - 1) for h in range(2, 51))
    pd_pae0 = max(abs(updating_vector("PD_PAE", h).u[0] - 1) for h in range(2, 65))
    left = 1 - 6 * 0.5**2 + 6 * 0.5**3
    right = 2 * (1 - 0.5) ** 3
    checks = [
        sums <= 1e-12,
        kernel_th2(0.0) == 1.0,
        kernel_th2(1.0) == 0.0,
        left == right == 0.25 == kernel_parzen(0.5),
        abs(psi1(4) - 0.16) <= 1e-12,
        abs(psi2(4) - 0.40) <= 1e-12,
        pd_pae0 <= 1e-12,
    ]
    record(4, "analytic anchors", all(checks), f"sum A-1 max {sums:.1e}, PD-PAE u0-1 max {pd_pae0:.1e}")


# -- 5 ------------------------------------------------------------------


def test_criterion_05_psd():
    params = scenario("large", "moderate")
    worst_batch = worst_stream = math.inf
    for d in range(100):
        day = simulate_day(params, rng=day_rng(SEED + 5, d))
        Y = synchronize(day.streams).returns
        for kind in (EstimatorKind.PD_RKE, EstimatorKind.PD_PAE):
            for h in (10, 50, 195):
                batch = oracle.batch_estimate(kind, Y, h)
                stream = EstimatorState(updating_vector(kind, h), 2).update_block(Y.T).current()
                worst_batch = min(worst_batch, np.linalg.eigvalsh(batch).min() / np.trace(batch))
                worst_stream = min(worst_stream, np.linalg.eigvalsh(stream).min() / np.trace(stream))
    ok = worst_batch >= -1e-10 and worst_stream >= -1e-8
    record(5, "PD kinds positive semidefinite", ok,
           f"min eig/trace batch {worst_batch:.3e}, streaming {worst_stream:.3e}")


# -- 6 ------------------------------------------------------------------


def test_criterion_06_memory_bound():
    ok = True
    notes = []
    rng = np.random.default_rng(SEED + 6)
    for m, h in ((2, 4), (2, 100), (5, 1000)):
        sizes = []
        for n in (10**3, 10**5):
            st = EstimatorState(updating_vector("PD_RKE", h), m)
            st.update_block(rng.standard_normal((n, m)))
            sizes.append(st.stored_reals)
        ok &= sizes[0] == sizes[1] <= m * (m + h)
        notes.append(f"(m={m},h={h}): {sizes[0]} <= {m * (m + h)}")
    record(6, "stored reals <= m(m+h), constant in n", ok, "; ".join(notes))


# -- 7 ------------------------------------------------------------------


def test_criterion_07_simulation_calibration():
    params = ModelParams()
    counts = []
    truth_sum = np.zeros((2, 2))
    for d in range(1000):
        day = simulate_day(params, rng=day_rng(SEED, d))
        truth_sum += day.truth
        if d < 200:
            counts.append(refresh_times(day.streams).size - 1)
    mean_n = float(np.mean(counts))
    mean_truth = truth_sum / 1000
    target = np.array([[1.00, 0.67], [0.67, 1.00]])
    n_ok = abs(mean_n / 20057 - 1) <= 0.03
    iv_ok = bool(np.all(np.abs(mean_truth - target) <= 0.05))
    record(7, "refresh count and mean integrated covariance", n_ok and iv_ok,
           f"mean n={mean_n:.0f} (formula {expected_refresh_count((1, 0.5), 23400):.0f}); "
           f"mean truth=[[{mean_truth[0, 0]:.3f}, {mean_truth[0, 1]:.3f}], [{mean_truth[1, 1]:.3f}]]")


# -- 8 ------------------------------------------------------------------


def test_criterion_08_table_reproduction():
    none, small, large = sweep("none", "moderate"), sweep("small", "moderate"), sweep("large", "moderate")
    parts, ok = [], True

    b, r = at(none, "RV", 1)
    cb, _ = at(none, "RV", 1, "cov12")
    bm, rm = at(none, "RV", 1, "qv_mean")
    good = abs(b) <= 0.01 and r <= 0.04 and abs(cb + 0.20) <= 0.04
    ok &= good
    parts.append(f"None/RV qv1 bias {b:+.4f} rmse {r:.4f} (qv_mean {bm:+.4f}/{rm:.4f}) cov bias {cb:+.3f}")

    b, r = at(small, "MSE", 13)
    bm, rm = at(small, "MSE", 13, "qv_mean")
    good = abs(b) <= 0.02 and r <= 0.12
    ok &= good
    parts.append(f"Small/MSE h=13 bias {b:+.4f} rmse {r:.4f} (qv_mean {bm:+.4f}/{rm:.4f})")

    picks = {k: best(large, k) for k in NOISE_ROBUST_KINDS}
    for k in (EstimatorKind.MSE, EstimatorKind.RKE, EstimatorKind.PAE):
        ok &= 0.13 <= picks[k][2] <= 0.28
    h_mse = picks[EstimatorKind.MSE][0]
    for k in (EstimatorKind.PD_RKE, EstimatorKind.PD_PAE):
        ok &= picks[k][0] >= 3 * h_mse
    parts.append("Large qv1 best " + ", ".join(f"{k.label} h={v[0]} rmse {v[2]:.3f}" for k, v in picks.items()))
    pooled = {k: best(large, k, "qv_mean") for k in NOISE_ROBUST_KINDS}
    parts.append("Large qv_mean best " + ", ".join(f"{k.label} h={v[0]} rmse {v[2]:.3f}" for k, v in pooled.items()))
    parts.append(f"Large RV qv1 bias {at(large, 'RV', 1)[0]:.1f}")

    cov = {k: best(large, k, "cov12") for k in NOISE_ROBUST_KINDS}
    ok &= all(v[2] <= 0.12 for v in cov.values())
    parts.append("Large cov best " + ", ".join(f"{k.label} h={v[0]} rmse {v[2]:.3f}" for k, v in cov.items()))
    record(8, "best-bandwidth table, moderate frequency", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_08_high_frequency_rows():
    none = sweep("none", "high", HIGH_REPLICATIONS)
    small = sweep("small", "high", HIGH_REPLICATIONS)
    large = sweep("large", "high", HIGH_REPLICATIONS)
    parts, ok = [], True
    b, r = at(none, "RV", 1)
    cb, _ = at(none, "RV", 1, "cov12")
    ok &= abs(b) <= 0.02 and r <= 0.08 and abs(cb + 0.20) <= 0.08
    parts.append(f"None/RV qv1 bias {b:+.4f} rmse {r:.4f} cov bias {cb:+.3f}")
    b, r = at(small, "MSE", 80)
    ok &= abs(b) <= 0.04 and r <= 0.24
    parts.append(f"Small/MSE h=80 bias {b:+.4f} rmse {r:.4f}")
    picks = {k: best(large, k) for k in NOISE_ROBUST_KINDS}
    ok &= all(0.06 <= picks[k][2] <= 0.26 for k in (EstimatorKind.MSE, EstimatorKind.RKE, EstimatorKind.PAE))
    h_mse = picks[EstimatorKind.MSE][0]
    ok &= all(picks[k][0] >= 1.5 * h_mse for k in (EstimatorKind.PD_RKE, EstimatorKind.PD_PAE))
    cov = {k: best(large, k, "cov12") for k in NOISE_ROBUST_KINDS}
    ok &= all(v[2] <= 0.08 for v in cov.values())
    parts.append("Large qv1 best " + ", ".join(f"{k.label} h={v[0]} rmse {v[2]:.3f}" for k, v in picks.items()))
    parts.append("Large cov best " + ", ".join(f"{k.label} h={v[0]} rmse {v[2]:.3f}" for k, v in cov.items()))
    record("8h", "best-bandwidth table, high frequency (50 days, tolerances x2)", ok, "; ".join(parts))


# -- 9 ------------------------------------------------------------------


def test_criterion_09_curve_shape():
    large = sweep("large", "moderate")
    _, r2 = at(large, "MSE", 2)
    h_mse, _, r_best = best(large, "MSE")
    ratio = r2 / r_best
    pairs = [(EstimatorKind.PD_RKE, EstimatorKind.RKE), (EstimatorKind.PD_PAE, EstimatorKind.PAE)]
    order = {pd: (best(large, pd)[0], best(large, base)[0]) for pd, base in pairs}
    ok = ratio >= 3 and all(a > b for a, b in order.values())
    record(9, "RMSE curve shape, large noise", ok,
           f"MSE rmse(h=2)/rmse(h={h_mse})={ratio:.1f}; "
           + ", ".join(f"{pd.label} h*={a} vs {base.label} h*={b}" for (pd, base), (a, b) in zip(pairs, order.values())))


# -- 10 -----------------------------------------------------------------


def test_criterion_10_sync_suite():
    rng = np.random.default_rng(SEED + 10)
    mismatches = 0
    for _ in range(100):
        streams = []
        for k in range(2):
            t = np.unique(rng.integers(0, 200, rng.integers(1, 80))) / 4.0
            streams.append(TickStream(t, rng.standard_normal(t.size), k))
        groups = [(t, g[::-1] if rng.random() < 0.5 else g) for t, g in merge_ticks(streams)]
        obs = list(iter_synchronized(groups, 2))
        panel = synchronize(streams, allow_empty=True)
        same = [o.time for o in obs] == panel.times.tolist() and (
            not obs or np.array_equal(np.column_stack([o.prices for o in obs]), panel.prices)
        )
        mismatches += not same
    t1, t2 = np.array([1.0, 3, 5, 7]), np.array([2.0, 4, 6])
    hand = synchronize([TickStream(t1, t1, 0), TickStream(t2, 10 + t2, 1)])
    hand_ok = (
        hand.times.tolist() == [2, 4, 6]
        and hand.prices.tolist() == [[1, 3, 5], [12, 14, 16]]
        and refresh_times([TickStream([1, 2, 3], [0] * 3, 0), TickStream([1, 2, 3], [0] * 3, 1)]).tolist() == [1, 2, 3]
        and refresh_times([TickStream([0.5, 1.5], [0, 0])]).tolist() == [0.5, 1.5]
    )
    state = SyncState(2)
    silent = all(state.push_tick(0, t, 0.0) is None for t in (1, 2, 3))
    record(10, "synchronizer batch/stream equivalence and hand examples",
           mismatches == 0 and hand_ok and silent, f"{mismatches}/100 mismatches")


if __name__ == "__main__":  # pragma: no cover
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
