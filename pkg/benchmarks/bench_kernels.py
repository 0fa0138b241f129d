"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from randcurv import _core
from randcurv.projective import monomial_exponents, kostlan_weights


def _best(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(rng):
    def poly(m, n):
        return rng.standard_normal((m, n + 1)) + 1j * rng.standard_normal((m, n + 1))

    A10 = poly(2000, 10)
    A40 = poly(200, 40)
    t = np.linspace(0, 1, 500)
    base = poly(1, 33)
    drift = poly(1, 33)
    chain = base + np.outer(t, drift[0]) * 0.5
    exps = monomial_exponents(8)
    c = (rng.standard_normal(len(exps)) + 1j * rng.standard_normal(len(exps))) * kostlan_weights(exps)
    X = rng.standard_normal((20000, 3)) + 1j * rng.standard_normal((20000, 3))
    return {
        "aberth deg 10 x 2000": lambda b: _core.aberth(A10, backend=b),
        "aberth deg 40 x 200": lambda b: _core.aberth(A40, backend=b),
        "aberth_chain deg 33 x 500": lambda b: _core.aberth_chain(chain, backend=b),
        "newton_polish deg 10 x 2000": lambda b: _core.newton_polish(A10, _core.initial_guess(A10), 3, backend=b),
        "hom_jets d=8 x 20000": lambda b: _core.hom_jets(exps, c, X, backend=b),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        _core.backend_module("compiled")
    except ImportError:
        print("compiled extension not built; nothing to compare")
        return 1
    rng = np.random.default_rng(2024)
    print(f"{'kernel':32s} {'compiled [ms]':>14s} {'python [ms]':>12s} {'speedup':>8s}")
    for name, fn in cases(rng).items():
        tc = _best(lambda: fn("compiled"), args.repeat)
        tp = _best(lambda: fn("python"), args.repeat)
        print(f"{name:32s} {1e3 * tc:14.2f} {1e3 * tp:12.2f} {tp / tc:8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
