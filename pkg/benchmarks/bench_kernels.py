"""Benchmark the numba kernels against the pure-numpy fallback.

Usage:
    python benchmarks/bench_kernels.py [--sizes 200,500,1000,2000] [--repeats 3]

Times the three hot kernels on realistic inputs: a Jaccard matrix build over
random visit sets, the UPGMA merge loop on the resulting (tie-heavy) matrix,
and silhouette scoring at k=4. The numba column includes a warm-up call so
jit compilation is not billed to the measurement.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from galleryflow._kernels import numpy_impl

try:
    from galleryflow._kernels import numba_impl
except ImportError:
    numba_impl = None


def visit_csr(rng: np.random.Generator, n: int, n_objects: int = 40):
    indptr = np.zeros(n + 1, dtype=np.int64)
    indices: list[int] = []
    for i in range(n):
        size = int(rng.integers(3, min(20, n_objects)))
        members = np.sort(rng.choice(n_objects, size=size, replace=False))
        indices.extend(int(x) for x in members)
        indptr[i + 1] = len(indices)
    return indptr, np.asarray(indices, dtype=np.int64), n_objects


def timeit(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="200,500,1000,2000")
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    backends = [("numpy", numpy_impl)]
    if numba_impl is not None:
        backends.append(("numba", numba_impl))
    else:
        print("numba unavailable; benchmarking the numpy fallback only")

    header = f"{'kernel':<12}{'n':>6}" + "".join(f"{name:>12}" for name, _ in backends)
    print(header)
    print("-" * len(header))

    rng = np.random.default_rng(0)
    for n in sizes:
        indptr, indices, n_objects = visit_csr(rng, n)
        dist = numpy_impl.jaccard_matrix(indptr, indices, n_objects)
        labels = rng.integers(0, 4, size=n).astype(np.int64)

        cases = [
            ("jaccard", lambda impl: impl.jaccard_matrix(indptr, indices, n_objects)),
            ("upgma", lambda impl: impl.upgma_linkage(dist)),
            ("silhouette", lambda impl: impl.silhouette_samples(dist, labels, 4)),
        ]
        for kernel_name, call in cases:
            row = f"{kernel_name:<12}{n:>6}"
            for _, impl in backends:
                call(impl)  # warm-up (jit compile / cache touch)
                row += f"{timeit(lambda: call(impl), args.repeats) * 1000:>10.1f}ms"
            print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
