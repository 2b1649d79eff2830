"""Benchmark: compiled kernel core vs the pure-numpy fallback.

Shapes mirror the sampling loop's hot spots: symmetric training matrices
around the 190-sample budget, the 800-candidate cross matrix, and the
800-cell scenario prior. Also times one fit+predict round trip through
each backend.

Run:  python benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from fieldwork import _kernels_py

try:
    from fieldwork import _kernels
except ImportError:
    _kernels = None


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_backends(repeats):
    rng = np.random.default_rng(0)
    train_190 = np.ascontiguousarray(rng.uniform(0, 0.005, size=(190, 2)))
    cand_800 = np.ascontiguousarray(rng.uniform(0, 0.005, size=(800, 2)))
    d2_190 = _kernels_py.sq_dists_sym(train_190)
    l, sf2, sn2 = 4.5e-4, 5.4, 0.06

    cases = [
        ("se_sym 190x190", lambda impl: impl.se_sym(train_190, l, sf2, sn2)),
        ("se_cross 800x190", lambda impl: impl.se_cross(cand_800, train_190, l, sf2)),
        ("se_sym 800x800", lambda impl: impl.se_sym(cand_800, l, sf2, 0.0)),
        ("sq_dists_sym 800", lambda impl: impl.sq_dists_sym(cand_800)),
        ("se_from_sq 190x190", lambda impl: impl.se_from_sq(d2_190, l, sf2)),
    ]
    rows = []
    for name, fn in cases:
        t_py = best_of(lambda: fn(_kernels_py), repeats)
        if _kernels is not None:
            t_c = best_of(lambda: fn(_kernels), repeats)
            rows.append((name, t_py, t_c, t_py / t_c))
        else:
            rows.append((name, t_py, None, None))
    return rows


def bench_fit_predict(repeats):
    """Full model round trip under each backend (env-independent timing)."""
    import importlib

    import fieldwork.backend as backend_mod
    import fieldwork.gp as gp_mod

    rng = np.random.default_rng(1)
    X = np.ascontiguousarray(rng.uniform(0, 0.005, size=(190, 2)))
    y = rng.uniform(0, 20, size=190)
    xstar = np.ascontiguousarray(rng.uniform(0, 0.005, size=(800, 2)))
    hp = gp_mod.Hyperparams(-7.7, 1.7, -2.7)
    train = gp_mod.TrainingSet(X, y)

    results = {}
    for impl, label in ((_kernels_py, "python"), (_kernels, "compiled")):
        if impl is None:
            continue
        backend_mod.se_sym = impl.se_sym
        backend_mod.se_cross = impl.se_cross
        backend_mod.sq_dists_sym = impl.sq_dists_sym
        backend_mod.se_from_sq = impl.se_from_sq
        importlib.reload(gp_mod)
        model = gp_mod.fit(train, hp)

        def roundtrip():
            m = gp_mod.fit(train, hp)
            gp_mod.predict(m, xstar)

        results[label] = best_of(roundtrip, repeats)
    importlib.reload(backend_mod)
    importlib.reload(gp_mod)
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=30)
    args = parser.parse_args()

    if _kernels is None:
        print("compiled extension not available; timing fallback only\n")

    print(f"{'kernel case':24s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, t_py, t_c, speedup in bench_backends(args.repeats):
        c = f"{t_c * 1e6:9.1f}us" if t_c is not None else "      n/a"
        s = f"{speedup:7.2f}x" if speedup is not None else "     n/a"
        print(f"{name:24s} {t_py * 1e6:9.1f}us {c} {s}")

    print()
    results = bench_fit_predict(args.repeats)
    for label, t in results.items():
        print(f"fit+predict(190 train, 800 test) [{label:8s}]: {t * 1e3:7.2f} ms")
    if len(results) == 2:
        print(f"round-trip speedup: {results['python'] / results['compiled']:.2f}x")


if __name__ == "__main__":
    main()
