"""Benchmark the compiled splat kernel against the numpy fallback.

Runs identical scatter workloads through every importable backend, checks
the outputs agree, and reports throughput plus an end-to-end render timing.

    python3 benchmarks/bench_backends.py --size 512 --repeats 3
"""

import argparse
import time

import numpy as np

from fsr import backend
from fsr.backend import available_backends
from fsr.kernels import gaussian_kernel
from fsr.refocus import make_targets, refocus
from fsr.synth import synth_stack, three_plane_scene


def make_jobs(size: int, seed: int = 0):
    """Source groups resembling a real render: mixed blur sizes, gated mask."""
    rng = np.random.default_rng(seed)
    allowed = np.ones((size, size))
    allowed[:, size // 2 :] = 0.0  # half the frame gated, as across a depth edge
    jobs = []
    for sigma in (1.0, 2.0, 4.0, 8.0):
        kern = np.ascontiguousarray(gaussian_kernel(sigma, None))
        n = size * size // 8
        ys = rng.integers(0, size, n).astype(np.int64)
        xs = rng.integers(0, size, n).astype(np.int64)
        vals = rng.random((n, 3))
        jobs.append((ys, xs, vals, kern, allowed))
    return jobs


def run_jobs(splat, jobs, size: int):
    energy = np.zeros((size, size, 3))
    weight = np.zeros((size, size))
    start = time.perf_counter()
    for ys, xs, vals, kern, allowed in jobs:
        splat(ys, xs, vals, kern, allowed, energy, weight)
    return time.perf_counter() - start, energy, weight


def taps(jobs) -> int:
    return sum(len(ys) * kern.size for ys, _, _, kern, _ in jobs)


def bench_kernel(args) -> None:
    backends = available_backends()
    jobs = make_jobs(args.size)
    total_taps = taps(jobs)
    print(f"scatter workload: {args.size}x{args.size}, {total_taps / 1e6:.0f}M kernel taps")

    results = {}
    for name, splat in sorted(backends.items()):
        best = np.inf
        for _ in range(args.repeats):
            elapsed, energy, weight = run_jobs(splat, jobs, args.size)
            best = min(best, elapsed)
        results[name] = (best, energy, weight)
        print(f"  {name:<8} {best:8.3f}s   {total_taps / best / 1e6:8.1f}M taps/s")

    if len(results) == 2:
        (ae, aw), (be, bw) = [(e, w) for _, e, w in results.values()]
        drift = max(np.abs(ae - be).max(), np.abs(aw - bw).max())
        fast, slow = sorted(results.items(), key=lambda kv: kv[1][0])
        speedup = slow[1][0] / fast[1][0]
        print(f"  outputs agree within {drift:.2e}; {fast[0]} is {speedup:.1f}x faster")


def bench_render(args) -> None:
    from fsr.pipeline import build_representation

    scene = three_plane_scene(seed=99, size=args.size, k=6)
    stack, _ = synth_stack(scene)
    rep = build_representation(stack)
    targets = make_targets("single", {"label": 0}, rep)
    print(f"end-to-end render: {args.size}x{args.size}, k=6, single-slice target")

    original = backend.splat_group
    try:
        for name, splat in sorted(available_backends().items()):
            backend.splat_group = splat
            refocus(rep, targets)  # warm caches
            best = np.inf
            for _ in range(args.repeats):
                start = time.perf_counter()
                refocus(rep, targets)
                best = min(best, time.perf_counter() - start)
            print(f"  {name:<8} {best:8.3f}s")
    finally:
        backend.splat_group = original


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    print(f"active backend: {backend.BACKEND}")
    bench_kernel(args)
    bench_render(args)


if __name__ == "__main__":
    main()
