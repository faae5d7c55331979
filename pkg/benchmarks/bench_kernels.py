"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Each case checks that both backends return identical results before timing.
"""

import argparse
import timeit

import numpy as np

from poisson_embedding import _pykernels, kernels


def cases(rng):
    walk = np.concatenate([[0.0], np.cumsum(rng.standard_normal(2_000_000))])

    k = 20_000
    knots = np.concatenate([[0.0], np.cumsum(rng.exponential(1 / k, k))])
    slopes = rng.choice([-100.0, 100.0], k + 1)
    kv = np.concatenate([[0.0], np.cumsum(slopes[:-1] * np.diff(knots))])
    mesh = np.linspace(0, 1, 1_000_001)
    mesh_v = rng.standard_normal(mesh.size).cumsum() * 1e-3

    spacings = rng.exponential(1 / 3200, (500, 3200))
    a = np.sort(rng.standard_normal(500_000))
    b = np.sort(rng.standard_normal(500_000))
    return {
        "inflection_indices (2e6 steps)": ("inflection_indices", (walk,)),
        "eval_piecewise (2e4 knots, 1e6 pts)": ("eval_piecewise", (knots, kv, slopes, mesh)),
        "sup_abs_gap (2e4 knots, 1e6 mesh)": ("sup_abs_gap", (knots, kv, slopes, mesh, mesh_v, 1.0)),
        "max_abs_centered (500 x 3200)": ("max_abs_centered", (spacings,)),
        "ks_two_sample_sorted (5e5 + 5e5)": ("ks_two_sample_sorted", (a, b)),
    }


def same(x, y):
    if isinstance(x, tuple):
        return x == y
    return np.array_equal(x, y)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    compiled = kernels.compiled_backend
    if compiled is None:
        print("compiled kernels not built; only the numpy fallback is available")
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'numpy [ms]':>11s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, (name, args_) in cases(rng).items():
        py = getattr(_pykernels, name)
        t_py = min(timeit.repeat(lambda: py(*args_), number=1, repeat=args.repeat)) * 1e3
        if compiled is None:
            print(f"{label:40s} {t_py:11.2f} {'-':>12s} {'-':>8s}")
            continue
        cy = getattr(compiled, name)
        assert same(py(*args_), cy(*args_)), f"{name}: backends disagree"
        t_cy = min(timeit.repeat(lambda: cy(*args_), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:40s} {t_py:11.2f} {t_cy:12.2f} {t_py / t_cy:8.1f}x")


if __name__ == "__main__":
    main()
