"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--sets 300] [--repeat 5]
"""

import argparse
import time

import numpy as np

from dexanno import _backend
from dexanno.closure import Contact, check_force_closure, grasp_matrix


def random_sets(rng, k):
    out = []
    for _ in range(k):
        n = int(rng.integers(2, 7))
        d = rng.normal(size=(n, 3))
        d /= np.linalg.norm(d, axis=1, keepdims=True)
        P = d * rng.uniform(0.2, 1.0, size=(n, 1))
        N = -d + 0.4 * rng.normal(size=(n, 3))
        N /= np.linalg.norm(N, axis=1, keepdims=True)
        out.append((P, N, float(rng.uniform(0.1, 1.0))))
    return out


def bounded_lp(rng, rows, cols):
    A = rng.normal(size=(rows, cols))
    A[-1] = 1.0
    b = A @ rng.uniform(0.1, 1.0, size=cols)
    return A, b, rng.normal(size=cols)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sets", type=int, default=300, help="contact sets / LPs per timing run")
    ap.add_argument("--repeat", type=int, default=5, help="timing runs; the best is reported")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    sets = random_sets(rng, args.sets)
    lps = [bounded_lp(rng, 8, 37) for _ in range(args.sets)]
    Gs = [grasp_matrix([Contact(p, n, mu) for p, n in zip(P, N)]).G for P, N, mu in sets]

    backends = ["python"] + (["cython"] if _backend.compiled_available() else [])
    results = {}
    for be in backends:
        k = _backend.get(be)
        _backend.use(be)
        results[be] = {
            "wrench_columns": best_of(
                lambda: [k.wrench_columns(P, N, np.full(len(P), np.arctan(mu)), 6, 1.0) for P, N, mu in sets],
                args.repeat),
            "lp_max": best_of(lambda: [k.lp_max(A, b, c) for A, b, c in lps], args.repeat),
            "check_force_closure": best_of(lambda: [check_force_closure(G) for G in Gs], args.repeat),
        }
    _backend.use("auto")

    print(f"{args.sets} items per run, best of {args.repeat}")
    print(f"{'kernel':<22}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for kernel in results["python"]:
        row = f"{kernel:<22}" + "".join(f"{results[b][kernel] * 1e3:>10.1f}ms" for b in backends)
        if len(backends) > 1:
            row += f"{results['python'][kernel] / results['cython'][kernel]:>11.1f}x"
        print(row)


if __name__ == "__main__":
    main()
