"""Compare the compiled kernel backend against the pure-Python fallback.

Times the two hot paths (nearest-neighbour selection and the SVR dual
solver) on identical inputs, checks that both backends return bitwise
identical results, and prints a small table with the speedup.

Run from the repository root:

    python3 benchmarks/bench_backends.py
"""

import argparse
import statistics
import time

import numpy as np

from cost2time._kernels import pure

try:
    from cost2time._kernels import _native as native
except ImportError:
    native = None

from cost2time.models.svr import KernelSpec, kernel_matrix


def time_call(fn, repeats):
    durations = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        durations.append(time.perf_counter() - start)
    return statistics.median(durations)


def bench_knn(args, rng):
    pool = rng.uniform(0.0, 1000.0, size=(args.pool_size, args.features))
    queries = rng.uniform(0.0, 1000.0, size=(args.queries, args.features))

    def scan(backend):
        def call():
            for q in queries:
                backend.knn_select(pool, q, args.k)

        return call

    for q in queries[:10]:
        assert native.knn_select(pool, q, args.k) == pure.knn_select(pool, q, args.k)

    t_pure = time_call(scan(pure), args.repeats) / args.queries
    t_native = time_call(scan(native), args.repeats) / args.queries
    label = f"knn_select  pool={args.pool_size}x{args.features} k={args.k}"
    return label, t_pure, t_native


def bench_smo(args, rng):
    X = rng.uniform(0.0, 10.0, size=(args.svr_n, args.features))
    y = np.sin(X[:, 0]) + 0.3 * X.sum(axis=1) + rng.normal(0.0, 0.1, size=args.svr_n)
    y = (y - y.mean()) / y.std()
    K = kernel_matrix(KernelSpec(family="rbf", gamma=1.0 / args.features), X, X)
    max_updates = 10000 * args.svr_n

    beta_p, bias_p, updates_p, conv_p = pure.smo_solve(K, y, 100.0, 0.1, 1e-3, max_updates)
    beta_n, bias_n, updates_n, conv_n = native.smo_solve(K, y, 100.0, 0.1, 1e-3, max_updates)
    assert np.array_equal(beta_p, beta_n)
    assert bias_p == bias_n and updates_p == updates_n and conv_p == conv_n

    t_pure = time_call(
        lambda: pure.smo_solve(K, y, 100.0, 0.1, 1e-3, max_updates), args.repeats
    )
    t_native = time_call(
        lambda: native.smo_solve(K, y, 100.0, 0.1, 1e-3, max_updates), args.repeats
    )
    label = f"smo_solve   n={args.svr_n} rbf"
    return label, t_pure, t_native


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--pool-size", type=int, default=2200)
    parser.add_argument("--features", type=int, default=1)
    parser.add_argument("--k", type=int, default=5)
    parser.add_argument("--queries", type=int, default=200)
    parser.add_argument("--svr-n", type=int, default=200)
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    if native is None:
        raise SystemExit(
            "compiled backend is not available; build the extension first "
            "(pip install -e . --no-build-isolation)"
        )

    rng = np.random.default_rng(args.seed)
    rows = [bench_knn(args, rng), bench_smo(args, rng)]

    print(f"{'kernel':<40} {'pure':>12} {'native':>12} {'speedup':>9}")
    for label, t_pure, t_native in rows:
        print(
            f"{label:<40} {t_pure * 1e3:>10.3f}ms {t_native * 1e3:>10.3f}ms "
            f"{t_pure / t_native:>8.1f}x"
        )
    print("\nboth backends returned bitwise identical results")


if __name__ == "__main__":
    main()
