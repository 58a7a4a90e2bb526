"""Command-line entry point: ``streamqv {estimate,simulate,sweep,oracle-check}``.

Exit codes: 0 success, 2 parse/ingestion error, 3 parameter error,
4 failed verification check, 1 anything unexpected.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time

import numpy as np

from . import __version__
from .checks import run_oracle_suite
from .config import RunConfig, load_config
from .errors import IngestionError, OrderingError, ParameterError, StreamQVError
from .ingest import read_ticks, reorder, write_ticks
from .metrics import bandwidth_sweep, table_rows, write_curves_csv, write_table_csv
from .sim import day_rng, simulate_day
from .stream import EstimatorState
from .sync import SyncState
from .weights import EstimatorKind, updating_vector

logger = logging.getLogger("streamqv")

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_PARSE = 2
EXIT_PARAM = 3
EXIT_CHECK = 4

_BLOCK = 512


def _fmt(v) -> str:
    return f"{float(v):.17g}"


# -- estimate ----------------------------------------------------------


def _pairs(cfg):
    pairs = []
    for kind in cfg.kinds:
        hs = [1] if kind is EstimatorKind.RV else cfg.bandwidths
        for h in hs:
            pairs.append((kind, h))
    return list(dict.fromkeys(pairs))


def estimate_file(path, cfg: RunConfig):
    """One pass over a tick file; returns ``(asset_names, n_returns, {(kind, h): matrix})``."""
    pairs = _pairs(cfg)
    for kind, h in pairs:
        updating_vector(kind, h)  # fail on bad bandwidths before reading anything
    with open(path, newline="") as fh:
        discovered = []
        records = read_ticks(
            fh, assets=cfg.assets, raw_prices=cfg.raw_prices, session_open=cfg.session_open, names=discovered
        )
        if cfg.assets is None:
            # the asset set must be known before synchronizing, so hold the ticks in memory
            logger.warning("%s: no asset list configured; buffering the file to discover assets", path)
            records = list(records)
            names = discovered
        else:
            names = list(cfg.assets)
        m = len(names)
        states = {p: EstimatorState(updating_vector(*p), m) for p in pairs}
        sync = SyncState(m)
        prev = None
        block = np.empty((_BLOCK, m))
        filled = 0
        n_returns = 0

        def flush(k):
            for st in states.values():
                st.update_block(block[:k])

        for t, group in reorder(records, cfg.reorder_horizon):
            obs = sync.push_group(t, group)
            if obs is None:
                continue
            if prev is not None:
                block[filled] = obs.prices - prev
                filled += 1
                n_returns += 1
                if filled == _BLOCK:
                    flush(filled)
                    filled = 0
            prev = obs.prices
        if filled:
            flush(filled)
    if n_returns == 0:
        logger.warning("%s: fewer than two refresh times; estimates are zero", path)
    return names, n_returns, {p: st.current() for p, st in states.items()}


def cmd_estimate(cfg: RunConfig, out) -> int:
    if not cfg.input:
        raise ParameterError("estimate needs --input")
    results = []
    for path in cfg.input:
        names, n, ests = estimate_file(path, cfg)
        for (kind, h), mat in ests.items():
            results.append({"session": os.path.basename(path), "kind": kind.label, "h": h, "n_returns": n,
                            "assets": names, "estimate": mat})
    if cfg.format == "json":
        payload = [
            {**{k: v for k, v in r.items() if k != "estimate"}, "estimate": [[float(x) for x in row] for row in r["estimate"]]}
            for r in results
        ]
        json.dump(payload, out, indent=1)
        out.write("\n")
    else:
        writer = csv.writer(out)
        writer.writerow(["session", "kind", "h", "n_returns", "row", "col", "value"])
        for r in results:
            for i, a in enumerate(r["assets"]):
                for j, b in enumerate(r["assets"]):
                    writer.writerow([r["session"], r["kind"], r["h"], r["n_returns"], a, b, _fmt(r["estimate"][i, j])])
    return EXIT_OK


# -- simulate ----------------------------------------------------------


def cmd_simulate(cfg: RunConfig, out) -> int:
    if not cfg.output:
        raise ParameterError("simulate needs --output DIR")
    scenarios = cfg.scenario or [("none", "moderate")]
    for noise, freq in scenarios:
        params = cfg.model_params(noise, freq)
        outdir = cfg.output if len(scenarios) == 1 else os.path.join(cfg.output, f"{noise}-{freq}")
        os.makedirs(outdir, exist_ok=True)
        names = [str(k + 1) for k in range(params.m)]
        with open(os.path.join(outdir, "truth.csv"), "w", newline="") as tf:
            tw = csv.writer(tf)
            tw.writerow(["day", "row", "col", "value"])
            for d in range(cfg.replications):
                day = simulate_day(params, rng=day_rng(cfg.seed, d))
                with open(os.path.join(outdir, f"day_{d:04d}.csv"), "w", newline="") as fh:
                    write_ticks(fh, day.streams, names)
                for i in range(params.m):
                    for j in range(params.m):
                        tw.writerow([d, names[i], names[j], _fmt(day.truth[i, j])])
        with open(os.path.join(outdir, "scenario.cfg"), "w") as fh:
            fh.write(f"# scenario {noise}/{freq}\nseed = {cfg.seed}\nreplications = {cfg.replications}\n")
            for key, value in params.to_dict().items():
                if isinstance(value, tuple):
                    value = ", ".join(_fmt(v) for v in value)
                fh.write(f"{key} = {value}\n")
        out.write(f"wrote {cfg.replications} day(s) to {outdir}\n")
    return EXIT_OK


# -- sweep -------------------------------------------------------------


def cmd_sweep(cfg: RunConfig, out) -> int:
    rows = []
    results = []
    for noise, freq in cfg.scenario:
        params = cfg.model_params(noise, freq)
        t0 = time.perf_counter()
        res = bandwidth_sweep(
            params,
            cfg.kinds,
            cfg.bandwidths,
            cfg.replications,
            seed=cfg.seed,
            scenario=f"{noise}/{freq}",
            engine=cfg.engine,
            workers=cfg.workers,
        )
        logger.info("%s/%s done in %.1fs", noise, freq, time.perf_counter() - t0)
        results.append(res)
        rows.extend(table_rows(res, cfg.kinds))
    if cfg.output:
        os.makedirs(cfg.output, exist_ok=True)
        write_table_csv(rows, os.path.join(cfg.output, "table.csv"))
        with open(os.path.join(cfg.output, "curves.csv"), "w", newline="") as fh:
            for i, res in enumerate(results):
                write_curves_csv(res, fh, header=(i == 0))
    write_table_csv(rows, out)
    return EXIT_OK


# -- oracle-check ------------------------------------------------------


def cmd_oracle_check(cfg: RunConfig, out, corrupt=False) -> int:
    kinds = [k for k in cfg.kinds if k is not EstimatorKind.RV] or list(EstimatorKind)[1:]
    results = run_oracle_suite(kinds, cfg.bandwidths, (1, 2, 3), n=cfg.n, seed=cfg.seed, corrupt=corrupt)
    failed = 0
    for r in results:
        out.write(r.line() + "\n")
        failed += not r.passed
    out.write(f"{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if failed == 0 else EXIT_CHECK


# -- argument handling -------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="streamqv", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--output", help="output file or directory")
        p.add_argument("--kinds", help="comma-separated estimator kinds")
        p.add_argument("--bandwidths", help="comma-separated bandwidths")
        p.add_argument("--seed", help="master seed")
        p.add_argument("--replications", help="number of simulated days")
        p.add_argument("--scenario", help="noise/frequency, several separated by ';'")
        return p

    p = common(sub.add_parser("estimate", help="estimate covariation from tick CSV files"))
    p.add_argument("--input", action="append", help="tick CSV (repeatable)")
    p.add_argument("--assets", help="comma-separated asset ids in index order")
    p.add_argument("--raw-prices", action="store_true", default=None, help="log_price column holds raw prices")
    p.add_argument("--reorder-horizon", help="seconds of cross-asset reordering tolerated")
    p.add_argument("--format", choices=["csv", "json"])

    common(sub.add_parser("simulate", help="write simulated tick files and ground truth"))

    p = common(sub.add_parser("sweep", help="bias/RMSE over bandwidths on simulated days"))
    p.add_argument("--workers", help="worker processes")
    p.add_argument("--engine", choices=["bank", "states"])

    p = common(sub.add_parser("oracle-check", help="verify streaming estimates against the dense oracle"))
    p.add_argument("--n", help="number of returns per check")
    p.add_argument("--corrupt", action="store_true", help="perturb updating vectors (negative control)")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.command == "sweep" and cfg.bandwidths == RunConfig().bandwidths and not args.bandwidths:
        from .metrics import default_bandwidths

        cfg.bandwidths = default_bandwidths(1000)
    values = {k: getattr(args, k, None) for k in (
        "output", "kinds", "bandwidths", "seed", "replications", "scenario",
        "assets", "reorder_horizon", "format", "workers", "engine", "n",
    )}
    if getattr(args, "input", None):
        values["input"] = ",".join(args.input)
    if getattr(args, "raw_prices", None):
        values["raw_prices"] = "true"
    return cfg.update(**values).validate()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    out = sys.stdout
    try:
        cfg = _config_from_args(args)
        if args.command == "estimate":
            return cmd_estimate(cfg, out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out)
        return cmd_oracle_check(cfg, out, corrupt=args.corrupt)
    except (IngestionError, OrderingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ParameterError, StreamQVError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
