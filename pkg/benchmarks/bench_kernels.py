"""Benchmark the compiled reduction kernels against the numpy fallback.

The segment max-abs reductions are the inner loop of the binary search:
every level of every search recomputes per-replicate maxima over the
union of surviving segments.  Run as

    python benchmarks/bench_kernels.py
"""

import time

import numpy as np

from birs._kernels import _numpy_impl

try:
    from birs._kernels import _core
except ImportError:
    _core = None


def time_call(fn, *args, repeats=7):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def dyadic_segments(p, level):
    width = p >> level
    starts = np.arange(0, p, width, dtype=np.int64)
    return starts, starts + width


def main():
    rng = np.random.default_rng(0)
    impls = [("numpy", _numpy_impl)]
    if _core is not None:
        impls.append(("cython", _core))
    else:
        print("compiled kernels unavailable; benchmarking the fallback only")

    print(f"{'case':<42}" + "".join(f"{name:>12}" for name, _ in impls) + f"{'speedup':>10}")
    for n_boot, p in ((300, 8_192), (1_000, 65_536), (500, 262_144)):
        mat = rng.standard_normal((n_boot, p))
        cases = [
            ("full-range rows_range_max_abs", lambda impl: impl.rows_range_max_abs(mat, 0, p)),
        ]
        for level in (1, 4, 7):
            starts, ends = dyadic_segments(p, level)
            cases.append(
                (
                    f"union of {len(starts)} dyadic segments",
                    lambda impl, s=starts, e=ends: impl.rows_segments_max_abs(mat, s, e),
                )
            )
        for label, runner in cases:
            times = [time_call(lambda: runner(impl)) for _, impl in impls]
            row = f"N={n_boot} p={p} {label}"
            cols = "".join(f"{t * 1e3:>10.2f}ms" for t in times)
            speedup = f"{times[0] / times[-1]:>9.2f}x" if len(times) > 1 else ""
            print(f"{row:<42}{cols}{speedup}")

    if _core is not None:
        mat = rng.standard_normal((200, 4_096))
        starts, ends = dyadic_segments(4_096, 5)
        a = np.asarray(_core.rows_segments_max_abs(mat, starts, ends))
        b = _numpy_impl.rows_segments_max_abs(mat, starts, ends)
        assert np.array_equal(a, b), "implementations disagree"
        print("agreement check: identical outputs")


if __name__ == "__main__":
    main()
