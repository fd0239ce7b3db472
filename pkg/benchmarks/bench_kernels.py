"""Compare the compiled and numpy kernel backends.

Usage: python3 benchmarks/bench_kernels.py [--repeat 5]
"""
import argparse
import timeit

import numpy as np

import fods_ident.gl as gl
from fods_ident import gl_coefficients, logistic_cosexp, simulate
from fods_ident._backend import get_kernels


def cases():
    rng = np.random.default_rng(0)
    alphas = np.array([0.3, 0.6, 0.9])
    table = gl_coefficients(alphas, 2000).table
    states = rng.normal(size=(2000, 3))
    short = rng.normal(size=(300, 3))
    dyn = logistic_cosexp()
    inputs = rng.uniform(-1, 1, size=(1000, 1))
    return {
        "gl_table J=200000, d=3": lambda k: k.gl_table(alphas, 200_000),
        "lagged_sum n=2000, d=3": lambda k: k.lagged_sum(table, states, 1),
        "gl_filter n=300, d=3": lambda k: k.gl_filter(table, short),
        "simulate T=1000, d=1": lambda k: simulate(dyn, 0.7, [0.4], inputs),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = {}
    for name in ("python", "cython"):
        try:
            backends[name] = get_kernels(name)
        except ImportError:
            print(f"{name} backend unavailable; skipping")
    print(f"{'case':28s}" + "".join(f"{b:>12s}" for b in backends) + "     speedup")
    for label, fn in cases().items():
        times, results = {}, {}
        for name, k in backends.items():
            gl.kernels = k
            results[name] = np.asarray(getattr(fn(k), "states", fn(k)))
            times[name] = min(timeit.repeat(lambda: fn(k), number=1, repeat=args.repeat))
        same = len({r.tobytes() for r in results.values()}) == 1
        speed = times["python"] / times["cython"] if len(times) == 2 else float("nan")
        print(f"{label:28s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times.values())
              + f"  {speed:8.1f}x  identical={same}")


if __name__ == "__main__":
    main()
