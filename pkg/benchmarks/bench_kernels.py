"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from pointerstates import _kernels_py as py

try:
    from pointerstates import _kernels as cy
except ImportError:
    cy = None


def _cases():
    g = np.random.default_rng(0)
    phi = g.uniform(-np.pi, np.pi, 256)
    c = g.normal(size=(100_000, 4))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    r = np.array([1.0, 0.0, 0.0])
    Ns = np.unique(np.round(np.logspace(0, 4, 40)).astype(np.int64))
    return {
        "geometric_factors (256 phases)": lambda m: m.geometric_factors(phi, 10_000),
        "ensemble_sums (1e5 samples x 40 N)": lambda m: m.ensemble_sums(c, r, Ns),
    }


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    print(f"{'kernel':40s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>8s}")
    for name, fn in _cases().items():
        tp = min(timeit.repeat(lambda: fn(py), number=1, repeat=args.repeat))
        if cy is None:
            print(f"{name:40s} {tp:12.4f} {'n/a':>12s} {'n/a':>8s}")
            continue
        tc = min(timeit.repeat(lambda: fn(cy), number=1, repeat=args.repeat))
        print(f"{name:40s} {tp:12.4f} {tc:12.4f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
