"""Compare CFTP throughput of the numba kernels against the interpreted fallback.

Each backend runs ``parity-sampler bench`` in its own interpreter so the
environment flag takes effect at import time. Usage:

    python3 benchmarks/bench_cftp.py [--graph wired-grid-6-6] [--r 0.5] [--n 100] [--n-python 5]

On graphs with a handful of edges the per-draw Python overhead dominates
and the gap shrinks (about 4x on k4).
"""
import argparse
import json
import os
import subprocess
import sys


def run(graph: str, r: float, n: int, seed: int, disable_jit: bool) -> dict:
    env = dict(os.environ)
    env["PARITY_SAMPLER_DISABLE_JIT"] = "1" if disable_jit else "0"
    cmd = [sys.executable, "-m", "parity_sampler", "bench", "--graph", graph, "--r", str(r),
           "--n", str(n), "--seed", str(seed)]
    out = subprocess.run(cmd, env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--graph", default="wired-grid-6-6")
    ap.add_argument("--r", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=100, help="draws for the numba backend")
    ap.add_argument("--n-python", type=int, default=5, help="draws for the interpreted backend")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    fast = run(args.graph, args.r, args.n, args.seed, disable_jit=False)
    slow = run(args.graph, args.r, args.n_python, args.seed, disable_jit=True)
    print(f"{'backend':<8} {'draws':>7} {'wall s':>9} {'draws/s':>10}")
    for res in (fast, slow):
        print(f"{res['backend']:<8} {res['n']:>7} {res['wall_s']:>9.3f} {res['samples_per_s']:>10.1f}")
    if fast["backend"] == "numba":
        print(f"speedup: {fast['samples_per_s'] / slow['samples_per_s']:.1f}x on {args.graph}, r = {args.r}")
    else:
        print("numba unavailable: both runs used the interpreted kernels")
    return 0


if __name__ == "__main__":
    sys.exit(main())
