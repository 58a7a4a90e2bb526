import math

import numpy as np
import pytest

from streamqv.errors import ParameterError
from streamqv.sim import (
    ModelParams,
    day_rng,
    expected_integrated_covariance,
    ou_exact_path,
    parse_scenario,
    poisson_times,
    scenario,
    simulate_day,
)


def test_poisson_counts():
    counts = [poisson_times(1.0, 23400.0, day_rng(7, d)).size for d in range(200)]
    assert abs(np.mean(counts) / 23400 - 1) < 0.03
    t = poisson_times(0.5, 1000.0, np.random.default_rng(0))
    assert np.all(np.diff(t) > 0) and t[0] > 0 and t[-1] <= 1000.0
    assert poisson_times(1.0, 0.0, np.random.default_rng(0)).size == 0


def test_ou_stationary_variance():
    rng = np.random.default_rng(11)
    ends = np.array([ou_exact_path(-0.025, [0.0, 37.0, 100.0], rng)[-1] for _ in range(20000)])
    assert abs(ends.var() / 20.0 - 1) < 0.05


def test_ou_autocorrelation():
    rng = np.random.default_rng(12)
    dt = 10.0
    pairs = np.array([ou_exact_path(-0.025, [0.0, dt], rng) for _ in range(10000)])
    r = np.corrcoef(pairs[:, 0], pairs[:, 1])[0, 1]
    assert abs(r - math.exp(-0.025 * dt)) < 0.02


def test_ou_zero_step_and_errors():
    path = ou_exact_path(-0.5, [0.0, 1.0, 1.0], np.random.default_rng(0), u0=0.3)
    assert path[0] == 0.3 and path[1] == path[2]
    with pytest.raises(ParameterError):
        ou_exact_path(0.1, [0.0, 1.0], np.random.default_rng(0))


def test_ou_long_path_keeps_scale():
    # the blockwise propagation must stay finite over spans far beyond 1/|theta|
    t = np.linspace(0, 5e4, 20001)
    path = ou_exact_path(-0.025, t, np.random.default_rng(1))
    assert np.all(np.isfinite(path))
    assert 10 < path.var() < 30


def test_no_noise_observes_latent():
    day = simulate_day(scenario("none", "moderate", horizon=2000.0), seed=1)
    for s, lat in zip(day.streams, day.latent):
        np.testing.assert_array_equal(s.prices, lat)


def test_noise_level():
    day = simulate_day(scenario("large", "moderate", horizon=5000.0), seed=2)
    for k, s in enumerate(day.streams):
        resid = s.prices - day.latent[k]
        assert abs(resid.std() / day.noise_std[k] - 1) < 0.05
        idx = np.searchsorted(day.grid, s.times)
        assert day.noise_std[k] == pytest.approx(0.1 * np.mean(day.spot_vol[k, idx] ** 4) ** 0.25)


def test_constant_volatility_truth():
    p = ModelParams(beta=0.0, horizon=3000.0)
    day = simulate_day(p, seed=3)
    e2a = math.exp(2 * p.alpha)
    np.testing.assert_allclose(np.diag(day.truth), e2a, rtol=1e-12)
    assert day.truth[0, 1] == pytest.approx((1 - p.rho**2) * e2a, rel=1e-12)
    np.testing.assert_allclose(expected_integrated_covariance(p), day.truth, rtol=1e-12)


@pytest.mark.parametrize("rho", [1.0, -1.0])
def test_no_common_factor_at_unit_leverage(rho):
    day = simulate_day(ModelParams(rho=rho, horizon=2000.0), seed=4)
    assert day.truth[0, 1] == 0.0


def test_truth_symmetric_psd_and_tracks_realized_variance():
    day = simulate_day(ModelParams(), seed=5)
    T = day.truth
    np.testing.assert_array_equal(T, T.T)
    assert np.linalg.eigvalsh(T).min() >= 0
    assert abs(T[0, 1]) <= math.sqrt(T[0, 0] * T[1, 1])
    # realized variance of the latent path at its own ticks is close to the truth
    for k in range(2):
        rv = np.sum(np.diff(day.latent[k]) ** 2)
        assert abs(rv / T[k, k] - 1) < 0.05


def test_determinism():
    a = simulate_day(scenario("small", "moderate", horizon=3000.0), rng=day_rng(9, 3))
    b = simulate_day(scenario("small", "moderate", horizon=3000.0), rng=day_rng(9, 3))
    for sa, sb in zip(a.streams, b.streams):
        np.testing.assert_array_equal(sa.times, sb.times)
        np.testing.assert_array_equal(sa.prices, sb.prices)
    np.testing.assert_array_equal(a.truth, b.truth)
    c = simulate_day(scenario("small", "moderate", horizon=3000.0), rng=day_rng(9, 4))
    assert not np.array_equal(a.truth, c.truth)


def test_expected_covariance_of_defaults():
    # independent log-vol factors: E[S1 S2] = exp(2 alpha + beta^2 v), v = 20
    off = 0.91 * math.exp(2 * -0.3125 + 0.125**2 * 20)
    assert off == pytest.approx(0.666, abs=1e-3)
    np.testing.assert_allclose(expected_integrated_covariance(ModelParams()), [[1, off], [off, 1]], atol=1e-12)


def test_scenario_names():
    assert parse_scenario("Large/Mod") == ("large", "moderate")
    assert parse_scenario("small,high") == ("small", "high")
    assert scenario("small", "high").mean_gaps == (0.1, 0.05)
    with pytest.raises(ParameterError):
        parse_scenario("huge/mod")
    with pytest.raises(ParameterError):
        ModelParams(theta=0.1)
