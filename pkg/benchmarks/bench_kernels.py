"""Compare the compiled kernels with the numpy fallback.

Usage: ``python3 benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]``

Each kernel is run on the same inputs through both backends and the outputs
are compared before timing: exactly for the quantiles, to 1e-9 relative for
the descent, whose sums run in a different order. ``--end-to-end`` also times one
synthetic replication in a subprocess per backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from wtqa import _fallback

try:
    from wtqa import _kernels
except ImportError:
    _kernels = None


def cases(rng):
    n, m = 440, 30
    scores = rng.exponential(size=n)
    w = rng.dirichlet(np.ones(n + 1))
    W = rng.dirichlet(np.ones(n + 1), size=m)
    levels = rng.uniform(0.8, 0.95, size=m)
    X = np.column_stack([np.ones(300), rng.normal(size=(300, 7))])
    y = X @ rng.normal(size=8) + rng.standard_t(3, size=300)
    return {
        "weighted_quantile (N=440)": ("weighted_quantile", (scores, w, 0.9), 2000),
        "weighted_quantile_batch (30x441)": ("weighted_quantile_batch", (scores, W, levels), 500),
        "pinball_descent (300x8, 300 iters)": ("pinball_descent",
                                               (X, y, 0.9, 300, 0.05, 1e-3, np.zeros(8)), 5),
    }


def same(a, b, exact):
    if isinstance(a, tuple):
        return all(same(x, y, exact) for x, y in zip(a, b))
    if exact:
        return np.array_equal(np.asarray(a), np.asarray(b))
    return np.allclose(a, b, rtol=1e-9, atol=1e-12)


def end_to_end(repeat):
    code = ("import time; from wtqa.harness import ExperimentConfig, run_replication; "
            "cfg = ExperimentConfig(methods=('split_cp','w_only','wtqa','lpci_lite')); "
            "run_replication(cfg, 0); t = time.perf_counter(); "
            f"[run_replication(cfg, i) for i in range({repeat})]; "
            f"print((time.perf_counter() - t) / {repeat})")
    out = {}
    for name, flag in (("cython", "0"), ("python", "1")):
        env = dict(os.environ, WTQA_PURE_PYTHON=flag)
        res = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True,
                             text=True, check=True)
        out[name] = float(res.stdout.strip())
    return out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repeats (best is reported)")
    ap.add_argument("--end-to-end", action="store_true", help="also time one replication")
    args = ap.parse_args(argv)
    if _kernels is None:
        sys.exit("compiled kernels are not built; run `pip install -e . --no-build-isolation`")

    print(f"{'kernel':<36} {'cython us':>10} {'numpy us':>10} {'speedup':>8}")
    for label, (fn, inputs, number) in cases(np.random.default_rng(0)).items():
        fast, slow = getattr(_kernels, fn), getattr(_fallback, fn)
        if not same(fast(*inputs), slow(*inputs), exact=fn != "pinball_descent"):
            sys.exit(f"{label}: backends disagree")
        t_fast = min(timeit.repeat(lambda: fast(*inputs), number=number, repeat=args.repeat))
        t_slow = min(timeit.repeat(lambda: slow(*inputs), number=number, repeat=args.repeat))
        print(f"{label:<36} {1e6 * t_fast / number:>10.1f} {1e6 * t_slow / number:>10.1f} "
              f"{t_slow / t_fast:>7.1f}x")
    if args.end_to_end:
        res = end_to_end(2)
        print(f"{'one easy replication (s)':<36} {res['cython']:>10.2f} {res['python']:>10.2f} "
              f"{res['python'] / res['cython']:>7.1f}x")


if __name__ == "__main__":
    main()
