"""Throughput of the compiled kernels against the NumPy fallback.

    python benchmarks/bench_kernels.py [--repeat 3] [--n 20000]

Prints one line per (kernel, shape) with the best-of-``repeat`` wall time
for each backend and the speedup.
"""
import argparse
import time

import numpy as np

from streamqv import _backend
from streamqv.stream import EstimatorState, LagBank
from streamqv.sync import refresh_times
from streamqv.sim import day_rng, poisson_times
from streamqv.weights import updating_vector


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def banded(backend, Y, h, block):
    m = Y.shape[1]
    st = EstimatorState(updating_vector("PD_RKE", h), m, backend=backend)
    if block:
        st.update_block(Y)
    else:
        for y in Y:
            st.update(y)


def bank(backend, Y, h):
    LagBank(h, Y.shape[1], backend=backend).update_block(Y)


def refresh(backend, streams):
    refresh_times(streams, backend=backend)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--n", type=int, default=20000, help="returns per run")
    args = ap.parse_args(argv)

    backends = _backend.available_backends()
    if "cython" not in backends:
        print("compiled kernels not built; only the NumPy fallback is available")
    rng = np.random.default_rng(0)
    cases = []
    for m, h in ((2, 2), (2, 50), (2, 500), (10, 50), (50, 10)):
        Y = rng.standard_normal((args.n, m))
        cases.append((f"banded block  m={m:<3d} h={h:<4d}", lambda b, Y=Y, h=h: banded(b, Y, h, True)))
    Y = rng.standard_normal((2000, 2))
    cases.append(("banded 1-by-1 m=2   h=50  (n=2000)", lambda b: banded(b, Y, 50, False)))
    Y2 = rng.standard_normal((args.n, 2))
    cases.append(("lag bank      m=2   H=1000", lambda b: bank(b, Y2, 1000)))
    g = day_rng(0, 0)
    streams = [(t, t) for t in (poisson_times(1.0, 23400.0, g), poisson_times(0.5, 23400.0, g))]
    cases.append(("refresh times one day, 2 assets", lambda b: refresh(b, streams)))

    header = f"{'case':38s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else "")
    print(header)
    for name, fn in cases:
        t = {b: best_of(lambda: fn(b), args.repeat) for b in backends}
        line = f"{name:38s}" + "".join(f"{t[b] * 1e3:10.2f}ms" for b in backends)
        if len(backends) > 1:
            line += f"{t['python'] / t['cython']:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
