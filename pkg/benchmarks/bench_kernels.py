"""Benchmark: compiled trajectory kernel versus the numpy fallback.

Runs the miss-distance kernel over batch sizes spanning single-candidate
chain steps up to full Monte Carlo levels, then times one complete
subset-simulation conflict query with each backend.

Usage: python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from subsim import _kernels
from subsim.analysis import phase_p1
from subsim.conflict import conflict_system
from subsim.engine import SubsetConfig, run_subset_simulation


def _time(fn, min_seconds=0.2):
    fn()  # warm-up
    reps = 0
    t0 = time.perf_counter()
    while True:
        fn()
        reps += 1
        el = time.perf_counter() - t0
        if el >= min_seconds:
            return el / reps


def bench_kernel():
    have_ext = _kernels._ext is not None
    rng = np.random.default_rng(7)
    obs = np.cumsum(rng.normal(size=(401, 2)), axis=0)
    print(f"active backend: {_kernels.active_backend()}")
    print(f"{'batch':>8} {'numpy':>12} {'cython':>12} {'speedup':>8}")
    for n in (1, 10, 100, 1000, 10000):
        states = rng.normal(size=(n, 6)) * np.array([1000, 80, 1, 1000, 5, 1])
        t_np = _time(lambda: _kernels.miss_distance_batch_numpy(states, obs, 0.05))
        if have_ext:
            t_cy = _time(lambda: _kernels._ext.miss_distance_batch(states, obs, 0.05))
            print(f"{n:>8} {t_np * 1e6:>10.1f}us {t_cy * 1e6:>10.1f}us {t_np / t_cy:>7.1f}x")
        else:
            print(f"{n:>8} {t_np * 1e6:>10.1f}us {'-':>12} {'-':>8}")
    if have_ext:
        m, i = _kernels._ext.miss_distance_batch(states, obs, 0.05)
        m2, i2 = _kernels.miss_distance_batch_numpy(states, obs, 0.05)
        print(f"backends bit-identical: {np.array_equal(m, m2) and np.array_equal(i, i2)}")


def bench_end_to_end():
    query = phase_p1(seed=42)
    config = SubsetConfig(n_samples=100, level_probability=0.1, max_levels=7)

    def run_with(use_ext):
        original = _kernels._USE_EXT
        _kernels._USE_EXT = use_ext
        try:
            system = conflict_system(query)
            return _time(
                lambda: run_subset_simulation(system, config, query.protected_radius, 3),
                min_seconds=0.5,
            )
        finally:
            _kernels._USE_EXT = original

    t_np = run_with(False)
    print(f"\nfull conflict query (N=100, m=7): numpy  {t_np * 1e3:.1f} ms")
    if _kernels._ext is not None:
        t_cy = run_with(True)
        print(f"full conflict query (N=100, m=7): cython {t_cy * 1e3:.1f} ms ({t_np / t_cy:.1f}x)")


if __name__ == "__main__":
    bench_kernel()
    bench_end_to_end()
