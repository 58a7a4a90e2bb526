"""Synthetic noisy, non-synchronous tick data with known integrated covariance.

Model (per asset ``k``, time measured in trading days)::

    dP^k = mu dt + rho S^k dB^k + sqrt(1 - rho^2) S^k dB^0
    S^k  = exp(alpha + beta U^k),   dU^k = theta U^k dt + dB^k

``B^0`` is a common factor, and ``B^k`` drives both the idiosyncratic
component and the log-volatility (leverage).  Observation times are Poisson
with mean gaps in seconds; a session of ``horizon`` seconds is one model time
unit, so with the default parameters ``E[S^2] = 1`` and the expected daily
integrated covariance is ``[[1, 0.67], [0.67, 1]]``.

Observed prices add i.i.d. Gaussian noise with standard deviation
``omega^k = xi * (mean of (S^k)^4 over the asset's ticks)^(1/4)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .errors import ParameterError
from .sync import TickStream

__all__ = [
    "ModelParams",
    "SimulatedDay",
    "NOISE_SCENARIOS",
    "FREQUENCY_SCENARIOS",
    "scenario",
    "parse_scenario",
    "poisson_times",
    "ou_exact_path",
    "simulate_day",
    "day_rng",
    "expected_refresh_count",
    "expected_integrated_covariance",
]

NOISE_SCENARIOS = {"none": 0.0, "small": 0.001, "large": 0.01}
FREQUENCY_SCENARIOS = {"moderate": (1.0, 0.5), "high": (0.1, 0.05)}
_ALIASES = {"mod": "moderate", "mod.": "moderate", "hi": "high"}


@dataclass(frozen=True)
class ModelParams:
    """Simulation parameters; defaults reproduce the moderate-frequency, no-noise design.

    ``mu`` and ``theta`` are rates per trading day.  ``mean_gaps`` are mean
    Poisson inter-arrival times in seconds, one per asset.  ``grid_step`` is
    the spacing in seconds of the regular grid merged with the tick times for
    the Euler scheme (0 disables it).
    """

    mu: float = 0.03
    rho: float = -0.3
    alpha: float = -0.3125
    beta: float = 0.125
    theta: float = -0.025
    xi2: float = 0.0
    mean_gaps: tuple = (1.0, 0.5)
    horizon: float = 23400.0
    grid_step: float = 1.0

    def __post_init__(self):
        gaps = tuple(float(g) for g in np.atleast_1d(self.mean_gaps))
        object.__setattr__(self, "mean_gaps", gaps)
        if not self.theta < 0:
            raise ParameterError(f"theta must be negative, got {self.theta}")
        if not -1.0 <= self.rho <= 1.0:
            raise ParameterError(f"rho must lie in [-1, 1], got {self.rho}")
        if not gaps or any(not g > 0 for g in gaps):
            raise ParameterError(f"mean gaps must be positive, got {self.mean_gaps}")
        if not self.horizon > 0:
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if self.xi2 < 0:
            raise ParameterError(f"xi2 must be non-negative, got {self.xi2}")
        if self.grid_step < 0:
            raise ParameterError(f"grid_step must be non-negative, got {self.grid_step}")

    @property
    def m(self) -> int:
        return len(self.mean_gaps)

    @property
    def xi(self) -> float:
        return math.sqrt(self.xi2)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _normalize(name: str, table: dict, aliases: dict) -> str:
    key = name.strip().lower()
    key = aliases.get(key, key)
    if key not in table:
        raise ParameterError(f"unknown scenario component {name!r}; expected one of {sorted(table)}")
    return key


def scenario(noise: str = "none", frequency: str = "moderate", **overrides) -> ModelParams:
    """Parameters of a named noise/frequency scenario (e.g. ``"large"``, ``"moderate"``)."""
    xi2 = NOISE_SCENARIOS[_normalize(noise, NOISE_SCENARIOS, {})]
    gaps = FREQUENCY_SCENARIOS[_normalize(frequency, FREQUENCY_SCENARIOS, _ALIASES)]
    return replace(ModelParams(xi2=xi2, mean_gaps=gaps), **overrides)


def parse_scenario(text: str) -> tuple[str, str]:
    """Split ``"large/mod"``, ``"Large-Moderate"`` or ``"small,high"`` into canonical names."""
    for sep in ("/", ",", "-", ":", "_"):
        if sep in text:
            noise, freq = text.split(sep, 1)
            break
    else:
        raise ParameterError(f"scenario must look like 'noise/frequency', got {text!r}")
    return (
        _normalize(noise, NOISE_SCENARIOS, {}),
        _normalize(freq, FREQUENCY_SCENARIOS, _ALIASES),
    )


def day_rng(seed, day: int) -> np.random.Generator:
    """Independent generator for replication ``day`` under a master seed."""
    return np.random.default_rng([int(seed), int(day)])


def poisson_times(mean_gap: float, horizon: float, rng: np.random.Generator) -> np.ndarray:
    """Arrival times of a Poisson process on ``(0, horizon]`` with exponential gaps."""
    if not mean_gap > 0:
        raise ParameterError(f"mean gap must be positive, got {mean_gap}")
    if horizon <= 0:
        return np.zeros(0)
    expected = horizon / mean_gap
    chunk = int(expected + 6.0 * math.sqrt(expected) + 16)
    parts = []
    t = 0.0
    while t <= horizon:
        arr = t + np.cumsum(rng.exponential(mean_gap, size=chunk))
        parts.append(arr)
        t = arr[-1]
    times = np.concatenate(parts)
    return times[times <= horizon]


def _ou_propagate(theta: float, t: np.ndarray, u0: float, innov: np.ndarray) -> np.ndarray:
    """Solve ``U_{i+1} = exp(theta dt_i) U_i + innov_i`` on times ``t``.

    Uses ``U_i = e^{theta t_i} (u0 + sum_{j<i} innov_j e^{-theta t_{j+1}})``
    in blocks short enough that the exponentials stay well scaled.
    """
    n = t.size
    out = np.empty(n)
    out[0] = u0
    start = 0
    max_span = 20.0 / abs(theta)
    while start < n - 1:
        stop = int(np.searchsorted(t, t[start] + max_span, side="right"))
        stop = min(max(stop, start + 2), n)
        tau = t[start:stop] - t[start]
        scaled = innov[start : stop - 1] * np.exp(-theta * tau[1:])
        out[start + 1 : stop] = np.exp(theta * tau[1:]) * (out[start] + np.cumsum(scaled))
        start = stop - 1
    return out


def ou_exact_path(theta: float, times, rng: np.random.Generator, u0=None) -> np.ndarray:
    """Exact Ornstein-Uhlenbeck path ``dU = theta U dt + dB`` sampled at ``times``.

    ``u0`` defaults to a draw from the stationary law ``N(0, -1/(2 theta))``.
    """
    if not theta < 0:
        raise ParameterError(f"theta must be negative, got {theta}")
    t = np.asarray(times, dtype=float)
    if t.size == 0:
        return np.zeros(0)
    if np.any(np.diff(t) < 0):
        raise ParameterError("times must be non-decreasing")
    if u0 is None:
        u0 = rng.normal(0.0, math.sqrt(-1.0 / (2.0 * theta)))
    dt = np.diff(t)
    var = np.expm1(2.0 * theta * dt) / (2.0 * theta)
    innov = rng.standard_normal(dt.size) * np.sqrt(var)
    return _ou_propagate(theta, t, float(u0), innov)


@dataclass
class SimulatedDay:
    """One simulated session.

    Tick times are in seconds; ``truth`` is the integrated covariance over
    the session (one model time unit).
    """

    streams: list
    latent: list
    grid: np.ndarray = field(repr=False)
    spot_vol: np.ndarray = field(repr=False)
    truth: np.ndarray = None
    noise_std: np.ndarray = None

    @property
    def m(self) -> int:
        return len(self.streams)


def simulate_day(params: ModelParams, seed=None, rng=None, with_noise: bool = True) -> SimulatedDay:
    """Simulate one session under ``params``.

    Either pass ``rng`` or a ``seed`` (int or sequence accepted by
    :func:`numpy.random.default_rng`).  The same seed gives a bit-identical
    result.
    """
    if rng is None:
        rng = np.random.default_rng(seed)
    p = params
    m = p.m
    tick_times = [poisson_times(g, p.horizon, rng) for g in p.mean_gaps]
    pieces = [np.array([0.0, p.horizon])] + tick_times
    if p.grid_step > 0:
        pieces.append(np.arange(0.0, p.horizon, p.grid_step))
    grid = np.unique(np.concatenate(pieces))
    t = grid / p.horizon
    dt = np.diff(t)
    sqdt = np.sqrt(dt)

    theta = p.theta
    var_ou = np.expm1(2.0 * theta * dt) / (2.0 * theta)
    cov_ou = np.expm1(theta * dt) / theta  # Cov(dB, OU innovation)
    resid_sd = np.sqrt(np.clip(var_ou - cov_ou**2 / dt, 0.0, None))
    stat_sd = math.sqrt(-1.0 / (2.0 * theta))
    common = np.sqrt(1.0 - p.rho**2)

    dB0 = rng.standard_normal(dt.size) * sqdt
    S = np.empty((m, grid.size))
    latent_grid = np.empty((m, grid.size))
    for k in range(m):
        u0 = rng.normal(0.0, stat_sd)
        dBk = rng.standard_normal(dt.size) * sqdt
        innov = cov_ou / dt * dBk + resid_sd * rng.standard_normal(dt.size)
        U = _ou_propagate(theta, t, u0, innov)
        S[k] = np.exp(p.alpha + p.beta * U)
        left = S[k, :-1]
        dP = p.mu * dt + p.rho * left * dBk + common * left * dB0
        latent_grid[k, 0] = 0.0
        np.cumsum(dP, out=latent_grid[k, 1:])

    Sl = S[:, :-1]
    truth = (Sl * dt) @ Sl.T * (1.0 - p.rho**2)
    truth[np.diag_indices(m)] = (Sl**2 * dt).sum(axis=1)

    streams, latent, omegas = [], [], []
    for k in range(m):
        idx = np.searchsorted(grid, tick_times[k])
        lat = latent_grid[k, idx]
        omega = p.xi * np.mean(S[k, idx] ** 4) ** 0.25 if idx.size else 0.0
        obs = lat
        if with_noise and p.xi2 > 0 and idx.size:
            obs = lat + omega * rng.standard_normal(idx.size)
        streams.append(TickStream(tick_times[k], obs, asset_id=k))
        latent.append(lat)
        omegas.append(omega)
    return SimulatedDay(streams, latent, grid, S, truth, np.array(omegas))


def expected_refresh_count(mean_gaps, horizon: float) -> float:
    """Mean number of refresh times for two independent Poisson streams."""
    l1, l2 = mean_gaps
    return horizon * (l1 + l2) / (l1**2 + l1 * l2 + l2**2)


def expected_integrated_covariance(params: ModelParams) -> np.ndarray:
    """Closed-form ``E[IV]`` under the stationary log-volatility law."""
    v = -1.0 / (2.0 * params.theta)
    diag = math.exp(2 * params.alpha + 2 * params.beta**2 * v)
    off = (1 - params.rho**2) * math.exp(2 * params.alpha + params.beta**2 * v)
    m = params.m
    out = np.full((m, m), off)
    np.fill_diagonal(out, diag)
    return out
