import csv
import io

import numpy as np
import pytest

from streamqv.errors import DimensionError, ParameterError
from streamqv.metrics import (
    bandwidth_sweep,
    best_bandwidth,
    default_bandwidths,
    evaluate,
    table_rows,
    write_curves_csv,
    write_table_csv,
)
from streamqv.sim import scenario

SMALL = scenario("large", "moderate", horizon=3000.0)


def test_evaluate_examples():
    T = np.random.default_rng(0).standard_normal((5, 2, 2))
    bias, rmse = evaluate(T, T)
    assert not bias.any() and not rmse.any()
    err = np.array([[0.1, 0.0], [0.0, -0.1]])
    bias, rmse = evaluate([err], [np.zeros((2, 2))])
    np.testing.assert_allclose(bias, err)
    np.testing.assert_allclose(rmse, np.abs(err))
    a = np.full((2, 2), 0.3)
    bias, rmse = evaluate([a, -a], np.zeros((2, 2, 2)))
    np.testing.assert_allclose(bias, 0.0, atol=1e-15)
    np.testing.assert_allclose(rmse, 0.3)


def test_evaluate_errors():
    with pytest.raises(ParameterError):
        evaluate(np.zeros((0, 2, 2)), np.zeros((0, 2, 2)))
    with pytest.raises(DimensionError):
        evaluate(np.zeros((2, 2, 2)), np.zeros((2, 3, 3)))


def test_best_bandwidth():
    h = np.array([1, 2, 4, 8])
    assert best_bandwidth(h, np.zeros(4), [4.0, 3.0, 2.0, 1.0])[0] == 8
    assert best_bandwidth(h, np.zeros(4), [1.0, 1.0, 1.0, 1.0])[0] == 1
    hs = np.arange(1, 15)
    curve = (hs - 7.0) ** 2 + 0.5
    assert best_bandwidth(hs, -curve, curve) == (7, -0.5, 0.5)
    assert best_bandwidth(hs[::-1], curve[::-1], curve[::-1])[0] == 7
    with pytest.raises(ParameterError):
        best_bandwidth([], [], [])


def test_default_grid():
    g = default_bandwidths(1000)
    assert g[:10] == list(range(1, 11)) and g[-1] == 1000
    assert default_bandwidths(30)[-1] == 25


@pytest.fixture(scope="module")
def sweep():
    return bandwidth_sweep(SMALL, ["RV", "MSE", "PD_RKE"], [1, 2, 4, 8], 6, seed=3, scenario="large/moderate")


def test_sweep_shapes_and_invariants(sweep):
    assert sweep.replications == 6
    assert (sweep.rmse >= np.abs(sweep.bias) - 1e-15).all()
    h, b, r = sweep.curve("RV")
    assert h.tolist() == [1, 2, 4, 8]
    assert np.all(r == r[0]) and np.all(b == b[0])
    assert sweep.curve("MSE")[0].tolist() == [2, 4, 8]


def test_sweep_is_deterministic(sweep):
    again = bandwidth_sweep(SMALL, ["RV", "MSE", "PD_RKE"], [1, 2, 4, 8], 6, seed=3, scenario="large/moderate")
    np.testing.assert_array_equal(again.rmse, sweep.rmse)
    np.testing.assert_array_equal(again.bias, sweep.bias)


def test_engines_agree(sweep):
    states = bandwidth_sweep(SMALL, ["RV", "MSE", "PD_RKE"], [1, 2, 4, 8], 6, seed=3, engine="states")
    np.testing.assert_allclose(states.rmse, sweep.rmse, rtol=1e-9)
    with pytest.raises(ParameterError):
        bandwidth_sweep(SMALL, ["RV"], [1], 1, engine="nope")


def test_summaries(sweep):
    i = 4
    b, r = sweep.summary(i, "qv_mean")
    err = sweep.errors[:, i]
    diag = np.concatenate([err[:, 0, 0], err[:, 1, 1]])
    assert b == pytest.approx(diag.mean()) and r == pytest.approx(np.sqrt((diag**2).mean()))
    assert sweep.summary(i, "1-2") == sweep.summary(i, "cov12")
    assert sweep.summary(i, "1-1") == sweep.summary(i, "qv1")


def test_table_and_curve_csv(sweep):
    rows = table_rows(sweep)
    assert [r.kind.label for r in rows] == ["RV", "MSE", "PD-RKE"]
    assert rows[0].qv1[0] == 1
    buf = io.StringIO()
    write_table_csv(rows, buf)
    table = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert table[1]["method"] == "MSE" and table[1]["scenario"] == "large/moderate"
    assert set(table[0]) >= {"qv1_band", "qv1_bias", "qv1_rmse", "qv_mean_rmse", "cov12_band"}
    buf = io.StringIO()
    write_curves_csv(sweep, buf)
    curves = list(csv.DictReader(io.StringIO(buf.getvalue())))
    assert list(curves[0]) == ["scenario", "kind", "h", "element", "bias", "rmse"]
    elements = {c["element"] for c in curves}
    assert elements == {"1-1", "1-2", "2-2", "qv_mean", "cov_mean"}
    pick = [c for c in curves if c["kind"] == "MSE" and c["h"] == "4" and c["element"] == "1-1"][0]
    i = sweep.pairs.index(next(p for p in sweep.pairs if p[0].value == "MSE" and p[1] == 4))
    assert float(pick["rmse"]) == sweep.rmse[i, 0, 0]
