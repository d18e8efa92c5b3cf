"""Compare the compiled kernels with the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--end-to-end]

Kernel timings call both backends directly in this process.  The
end-to-end timing runs a short grid in a subprocess per backend, selected
with PARAMCTL_PURE_PYTHON.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from paramctl import _kernels_py

try:
    from paramctl import _kernels
except ImportError:
    _kernels = None


def _cases(rng: np.random.Generator):
    def ks_split(n, n_groups):
        keys = np.sort(rng.uniform(0, 1, n))
        groups = rng.integers(0, n_groups, n).astype(np.intp)
        return lambda m: m.best_ks_split(keys, groups, n_groups, 1, 10_000)

    def entropy(n):
        values = np.sort(rng.uniform(0, 1, n))
        labels = rng.integers(0, 2, n).astype(np.int8)
        return lambda m: m.best_entropy_split(values, labels, False)

    return [
        ("ks_sf_exact n=10x10", lambda m: m.ks_sf_exact(60, 10, 10)),
        ("ks_sf_exact n=90x90", lambda m: m.ks_sf_exact(3000, 90, 90)),
        ("ks_sf_asymptotic", lambda m: m.ks_sf_asymptotic(0.3, 200, 300)),
        ("best_ks_split n=20", ks_split(20, 20)),
        ("best_ks_split n=100", ks_split(100, 100)),
        ("best_ks_split n=1000", ks_split(1000, 200)),
        ("best_entropy_split n=100", entropy(100)),
        ("best_entropy_split n=1000", entropy(1000)),
    ]


def _time(fn, repeat: int) -> float:
    number = 1
    while timeit.timeit(fn, number=number) < 0.05 and number < 10**6:
        number *= 4
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def bench_kernels(repeat: int) -> None:
    if _kernels is None:
        print("compiled extension not built; only the fallback can be timed")
    rng = np.random.default_rng(0)
    print(f"{'kernel':28s} {'python':>12s} {'cython':>12s} {'speedup':>8s}")
    for name, call in _cases(rng):
        tp = _time(lambda: call(_kernels_py), repeat)
        if _kernels is None:
            print(f"{name:28s} {tp * 1e6:10.1f}us {'-':>12s} {'-':>8s}")
            continue
        tc = _time(lambda: call(_kernels), repeat)
        print(f"{name:28s} {tp * 1e6:10.1f}us {tc * 1e6:10.1f}us {tp / tc:7.1f}x")


_GRID = """\
import hashlib
import time
from paramctl.harness import apply_overrides, load_config, run_grid
cfg = apply_overrides(load_config(None), runs=3, controllers=["A", "K", "EK"], problems=["sphere"],
                      k=[1], mu=[5], lam=[7], seed=0)
t = time.perf_counter()
summary, _ = run_grid(cfg)
print(time.perf_counter() - t, hashlib.sha256(summary.to_json().encode()).hexdigest())
"""


def bench_end_to_end() -> None:
    out = {}
    for label, flag in (("python", "1"), ("cython", "0")):
        env = dict(os.environ, PARAMCTL_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", _GRID], env=env, capture_output=True, text=True, check=True)
        secs, digest = res.stdout.split()
        out[label] = (float(secs), digest)
    same = out["python"][1] == out["cython"][1]
    print(f"\nend-to-end grid (A, K, EK on sphere, 3 runs each):"
          f"\n  python {out['python'][0]:.2f}s  cython {out['cython'][0]:.2f}s  "
          f"speedup {out['python'][0] / out['cython'][0]:.2f}x  identical results: {same}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true", help="also time a short grid under each backend")
    args = ap.parse_args()
    bench_kernels(args.repeat)
    if args.end_to_end:
        bench_end_to_end()


if __name__ == "__main__":
    main()
