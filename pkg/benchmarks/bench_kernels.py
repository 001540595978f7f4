"""Time the numba and numpy flavours of every hot kernel.

Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

The end-to-end comparison runs one tournament in two subprocesses, one with
``GAUSSIAN_TOURNAMENT_NO_NUMBA=1`` set.
"""
import argparse
import json
import os
import subprocess
import sys
import time
import timeit

import numpy as np

from gaussian_tournament import _accel, kernels as K


def _cases():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((3000, 8))
    C = Y[::10].copy()
    Z = rng.standard_t(3, (2000, 400))
    P = np.abs(rng.standard_normal((2000, 600)))
    norms = np.sort(rng.uniform(0.1, 2.0, 600))
    radii = np.geomspace(0.01, 5, 200)
    return {
        "mom_columns": (lambda f: f(Z, 43), K.mom_columns_numba, K.mom_columns_numpy),
        "greedy_centers": (lambda f: f(Y, 1.5), K.greedy_centers_numba, K.greedy_centers_numpy),
        "nearest": (lambda f: f(Y, C), K.nearest_numba, K.nearest_numpy),
        "minimax": (lambda f: f(Y[:1500]), K.minimax_numba, K.minimax_numpy),
        "farthest_order": (lambda f: f(Y, 0, 256), K.farthest_order_numba,
                           K.farthest_order_numpy),
        "sup_profile": (lambda f: f(P, norms, radii), K.sup_profile_numba, K.sup_profile_numpy),
    }


def bench_kernels(repeat):
    rows = []
    for name, (call, fast, slow) in _cases().items():
        call(fast)  # compile
        t_fast = min(timeit.repeat(lambda: call(fast), number=1, repeat=repeat))
        t_slow = min(timeit.repeat(lambda: call(slow), number=1, repeat=repeat))
        rows.append({"kernel": name, "numba_s": t_fast, "numpy_s": t_slow,
                     "speedup": t_slow / t_fast})
    return rows


_LEARN = """
import time
from gaussian_tournament.harness import ExperimentConfig, build_class, gen_regression
from gaussian_tournament.tournament import learn
cfg = ExperimentConfig()
F = build_class(cfg)
s = gen_regression(cfg, 0, F)
learn(F, s.X, s.Y, 0.135)
t = time.perf_counter()
for i in range(1, 6):
    s = gen_regression(cfg, i, F)
    learn(F, s.X, s.Y, 0.135)
print((time.perf_counter() - t) / 5)
"""


def bench_learn():
    out = {}
    for label, flag in (("numba", None), ("numpy", "1")):
        env = {k: v for k, v in os.environ.items() if k != _accel.ENV_FLAG}
        if flag:
            env[_accel.ENV_FLAG] = flag
        res = subprocess.run([sys.executable, "-c", _LEARN], env=env, capture_output=True,
                             text=True, check=True)
        out[label] = float(res.stdout.split()[-1])
    return out


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json")
    p.add_argument("--skip-learn", action="store_true")
    args = p.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not installed")
    rows = bench_kernels(args.repeat)
    print(f"{'kernel':<16}{'numba [ms]':>12}{'numpy [ms]':>12}{'speedup':>9}")
    for r in rows:
        print(f"{r['kernel']:<16}{1e3 * r['numba_s']:>12.2f}{1e3 * r['numpy_s']:>12.2f}"
              f"{r['speedup']:>9.1f}")
    result = {"kernels": rows}
    if not args.skip_learn:
        t0 = time.perf_counter()
        result["learn_seconds"] = bench_learn()
        ln = result["learn_seconds"]
        print(f"learn (default testbed, mean of 5): numba {ln['numba']:.2f}s, "
              f"numpy {ln['numpy']:.2f}s ({time.perf_counter() - t0:.0f}s total)")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(result, fh, indent=2)


if __name__ == "__main__":
    main()
