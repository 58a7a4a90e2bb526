"""Flat ``key = value`` run configuration.

Lines starting with ``#`` and blank lines are ignored.  List values are
comma separated.  Every model key defaults to the standard simulation design
(see :class:`streamqv.sim.ModelParams`).

Keys
----
kinds            estimator kinds, e.g. ``RV, MSE, PD_RKE``
bandwidths       bandwidths, e.g. ``2, 4, 8``
seed             master seed (int)
replications     number of simulated days
scenario         ``noise/frequency`` pairs separated by ``;``, e.g. ``large/mod; small/mod``
input            tick CSV path(s), comma separated
output           output path (file or directory, depending on the command)
assets           asset ids in index order (required for single-pass estimation)
raw_prices       ``true`` if the ``log_price`` column holds raw prices
reorder_horizon  seconds a tick may arrive late relative to other assets
session_open     ISO timestamp that maps to time 0 for ISO-formatted times
format           ``csv`` or ``json`` output for ``estimate``
workers          worker processes for simulation replications
engine           ``bank`` or ``states`` for sweeps
n                sample size for the oracle check
mu, rho, alpha, beta, theta, xi2, mean_gaps, horizon, grid_step
                 model parameters
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import IngestionError, ParameterError
from .sim import ModelParams, parse_scenario, scenario
from .weights import EstimatorKind

__all__ = ["RunConfig", "parse_config_text", "load_config"]


def _bool(text):
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(text):
    if isinstance(text, (list, tuple)):
        return list(text)
    return [p.strip() for p in str(text).split(",") if p.strip()]


def _ints(text):
    return [int(v) for v in _list(text)]


def _floats(text):
    return tuple(float(v) for v in _list(text))


def _kinds(text):
    return [EstimatorKind.parse(k) for k in _list(text)]


def _scenarios(text):
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s.strip() for s in str(text).split(";") if s.strip()]
    return [parse_scenario(s) for s in items]


_RUN_KEYS = {
    "kinds": _kinds,
    "bandwidths": _ints,
    "seed": int,
    "replications": int,
    "scenario": _scenarios,
    "input": _list,
    "output": str,
    "assets": _list,
    "raw_prices": _bool,
    "reorder_horizon": float,
    "session_open": str,
    "format": str,
    "workers": int,
    "engine": str,
    "n": int,
}

_MODEL_KEYS = {
    "mu": float,
    "rho": float,
    "alpha": float,
    "beta": float,
    "theta": float,
    "xi2": float,
    "mean_gaps": _floats,
    "horizon": float,
    "grid_step": float,
}


@dataclass
class RunConfig:
    kinds: list = field(default_factory=lambda: list(EstimatorKind))
    bandwidths: list = field(default_factory=lambda: [2, 4, 8, 16])
    seed: int = 20190101
    replications: int = 200
    scenario: list = field(default_factory=lambda: [("none", "moderate")])
    input: list = field(default_factory=list)
    output: str = None
    assets: list = None
    raw_prices: bool = False
    reorder_horizon: float = 0.0
    session_open: str = None
    format: str = "csv"
    workers: int = 1
    engine: str = "bank"
    n: int = 200
    model: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        if not self.kinds:
            raise ParameterError("at least one estimator kind is required")
        if not self.bandwidths or any(h < 1 for h in self.bandwidths):
            raise ParameterError(f"bandwidths must be positive integers, got {self.bandwidths}")
        if self.replications < 1:
            raise ParameterError(f"replications must be positive, got {self.replications}")
        if self.reorder_horizon < 0:
            raise ParameterError("reorder_horizon must be non-negative")
        if self.format not in ("csv", "json"):
            raise ParameterError(f"format must be csv or json, got {self.format!r}")
        if self.engine not in ("bank", "states"):
            raise ParameterError(f"engine must be bank or states, got {self.engine!r}")
        if self.workers < 1:
            raise ParameterError("workers must be >= 1")
        if self.assets is not None and len(set(self.assets)) != len(self.assets):
            raise ParameterError(f"duplicate asset ids in {self.assets}")
        self.model_params()  # validates the model keys
        return self

    def model_params(self, noise=None, frequency=None) -> ModelParams:
        """Model parameters, optionally for a named scenario with config overrides on top."""
        if noise is not None:
            base = scenario(noise, frequency)
        else:
            base = ModelParams()
        return replace(base, **self.model)

    def update(self, **values) -> "RunConfig":
        """Apply raw (string or typed) values, converting known keys."""
        for key, raw in values.items():
            if raw is None:
                continue
            _apply(self, key, raw, line=None)
        return self


def _apply(cfg, key, raw, line):
    key = key.strip().lower().replace("-", "_")
    try:
        if key in _RUN_KEYS:
            setattr(cfg, key, _RUN_KEYS[key](raw) if isinstance(raw, str) or key in ("kinds", "scenario") else raw)
        elif key in _MODEL_KEYS:
            cfg.model[key] = _MODEL_KEYS[key](raw) if isinstance(raw, str) else raw
        else:
            raise IngestionError(f"unknown configuration key {key!r}", line)
    except (IngestionError, ParameterError):
        raise
    except (ValueError, TypeError) as exc:
        raise IngestionError(f"bad value for {key!r}: {exc}", line) from None


def parse_config_text(text: str, cfg: RunConfig = None) -> RunConfig:
    cfg = cfg or RunConfig()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise IngestionError(f"expected 'key = value', got {line.strip()!r}", lineno)
        key, value = stripped.split("=", 1)
        _apply(cfg, key, value.strip(), lineno)
    return cfg


def load_config(path) -> RunConfig:
    with open(path) as fh:
        return parse_config_text(fh.read())
