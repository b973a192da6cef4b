"""Compare the compiled Lloyd kernels against the numpy fallback.

Usage: python3 benchmarks/bench_kernels.py [--points N] [--dim D] [--k K]
"""

import argparse
import timeit

import numpy as np

from aura.kernels import _lloyd_np

try:
    from aura.kernels import _lloyd_cy
except ImportError:
    _lloyd_cy = None


def bench(impl, points, centroids, labels, k, repeat=5, number=3):
    t_assign = min(timeit.repeat(
        lambda: impl.assign_nearest(points, centroids),
        repeat=repeat, number=number,
    )) / number
    t_update = min(timeit.repeat(
        lambda: impl.centroid_update(points, labels, k),
        repeat=repeat, number=number,
    )) / number
    return t_assign, t_update


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, default=20_000)
    parser.add_argument("--dim", type=int, default=32)
    parser.add_argument("--k", type=int, default=8)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    points = rng.normal(size=(args.points, args.dim))
    centroids = rng.normal(size=(args.k, args.dim))
    labels, _ = _lloyd_np.assign_nearest(points, centroids)

    print(f"n={args.points} dim={args.dim} k={args.k}")
    print(f"{'backend':<8} {'assign_nearest':>16} {'centroid_update':>16}")
    a_np, u_np = bench(_lloyd_np, points, centroids, labels, args.k)
    print(f"{'numpy':<8} {a_np * 1e3:>13.2f} ms {u_np * 1e3:>13.2f} ms")
    if _lloyd_cy is None:
        print("cython   (extension not built)")
        return
    a_cy, u_cy = bench(_lloyd_cy, points, centroids, labels, args.k)
    print(f"{'cython':<8} {a_cy * 1e3:>13.2f} ms {u_cy * 1e3:>13.2f} ms")
    print(f"speedup  {a_np / a_cy:>13.2f} x  {u_np / u_cy:>13.2f} x")


if __name__ == "__main__":
    main()
