"""Timing comparison of the compiled kernels against the numpy fallback.

Run from the repository root after installing the package:

    python3 benchmarks/bench_kernels.py [--repeat N]

Each row times one kernel on one workload size for both backends and
reports the speedup of the compiled core. Absolute numbers depend on the
machine; the point is the relative cost and that both backends agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from defi_rank import _pure

try:
    from defi_rank._native import _kernels as _native
except ImportError:
    _native = None


def timeit(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - started)
    return best


def reciprocal_matrix(rng: np.random.Generator, n: int) -> np.ndarray:
    m = np.ones((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            m[i, j] = np.exp(rng.uniform(-np.log(9.0), np.log(9.0)))
            m[j, i] = 1.0 / m[i, j]
    return m


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5, help="timing repeats")
    args = parser.parse_args()

    rng = np.random.default_rng(1)
    rows: list[tuple[str, str, float, float | None]] = []

    for n, loops in ((4, 20000), (10, 10000), (50, 2000)):
        matrix = np.ascontiguousarray(reciprocal_matrix(rng, n))

        def run(backend):
            def body():
                for _ in range(loops):
                    backend.power_iteration(matrix, 1e-10, 10000)

            return body

        pure_t = timeit(run(_pure), args.repeat)
        native_t = timeit(run(_native), args.repeat) if _native else None
        rows.append((f"power_iteration n={n}", f"{loops}x", pure_t, native_t))

    for size in (1_000, 100_000, 1_000_000):
        values = rng.lognormal(0.0, 2.0, size=size)
        asc = np.ascontiguousarray(np.sort(values))
        desc = np.ascontiguousarray(asc[::-1])
        loops = max(1, 2_000_000 // size)
        cases = (
            ("gini_sorted", lambda b: b.gini_sorted(asc)),
            ("nakamoto_sorted", lambda b: b.nakamoto_sorted(desc)),
            ("top_share_sorted", lambda b: b.top_share_sorted(desc, 10)),
        )
        for name, call in cases:
            def run(backend, call=call):
                def body():
                    for _ in range(loops):
                        call(backend)

                return body

            pure_t = timeit(run(_pure), args.repeat)
            native_t = timeit(run(_native), args.repeat) if _native else None
            rows.append((f"{name} n={size}", f"{loops}x", pure_t, native_t))

    count = 200_000
    addresses = [f"{i:040x}" for i in range(1, 500)]
    zero = "0" * 40
    froms = [zero] * count
    tos = [addresses[int(rng.integers(0, len(addresses)))] for _ in range(count)]
    amounts = [int(rng.integers(1, 10**18)) for _ in range(count)]

    def run_replay(backend):
        def body():
            backend.replay(froms, tos, amounts, {}, zero)

        return body

    pure_t = timeit(run_replay(_pure), args.repeat)
    native_t = timeit(run_replay(_native), args.repeat) if _native else None
    rows.append((f"replay events={count}", "1x", pure_t, native_t))

    width = max(len(r[0]) for r in rows)
    print(f"{'kernel':<{width}}  {'loops':>7}  {'pure':>10}  {'native':>10}  speedup")
    for name, loops, pure_t, native_t in rows:
        if native_t is None:
            print(f"{name:<{width}}  {loops:>7}  {pure_t * 1e3:>8.2f}ms  {'n/a':>10}")
        else:
            print(
                f"{name:<{width}}  {loops:>7}  {pure_t * 1e3:>8.2f}ms  "
                f"{native_t * 1e3:>8.2f}ms  {pure_t / native_t:>6.1f}x"
            )
    if _native is None:
        print("\ncompiled backend not available; showing fallback timings only")


if __name__ == "__main__":
    main()
