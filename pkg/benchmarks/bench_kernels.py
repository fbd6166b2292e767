"""Benchmark the jitted kernels against the pure-numpy interpreted path.

Runs each kernel workload in two subprocesses (CDBEAM_DISABLE_JIT unset/set)
so the import-time jit selection is exercised exactly as users see it.

    python benchmarks/bench_kernels.py [--sizes 40,80] [--repeat 3]
"""

import argparse
import json
import os
import subprocess
import sys
import textwrap

_WORKER = textwrap.dedent(
    """
    import json, sys, time
    import numpy as np

    sizes = json.loads(sys.argv[1])
    repeat = int(sys.argv[2])

    import cdbeam._kernels as K
    from cdbeam._jit import JIT_ENABLED

    rng = np.random.default_rng(42)
    out = {"jit": bool(JIT_ENABLED), "results": {}}

    def bench(name, fn, *args):
        fn(*args)  # warmup / compile
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn(*args)
            best = min(best, time.perf_counter() - t0)
        out["results"].setdefault(name, []).append(best)

    for n in sizes:
        A = rng.normal(size=(n, n))
        A = A @ A.T + n * np.eye(n)
        b = rng.normal(size=n)
        S = 0.5 * (A + A.T) - 0.8 * n * np.eye(n)  # indefinite
        bench(f"chol_lower n={n}", K.chol_lower, A)
        bench(f"ldlt_factor n={n}", K.ldlt_factor, S)
        L, ipiv, _ = K.ldlt_factor(S)
        bench(f"ldlt_solve n={n}", K.ldlt_solve, L, ipiv, b)
        bench(f"jacobi_eigh n={n}", K.jacobi_eigh, 0.5 * (S + S.T), 1e-13, 100)
        # barrier accumulation: 12 sparse terms of support 6
        nt = 12
        tvar = np.arange(nt, dtype=np.int64)
        tk = np.full(nt, 6, dtype=np.int64)
        tsupp = np.zeros((nt, 6), dtype=np.int64)
        tsmall = np.zeros((nt, 6, 6))
        for i in range(nt):
            tsupp[i] = np.sort(rng.choice(n, size=6, replace=False))
            M = rng.normal(size=(6, 6))
            tsmall[i] = M + M.T
        Lc, _ = K.chol_lower(A)
        g = np.zeros(nt)
        H = np.zeros((nt, nt))
        bench(f"barrier_terms n={n}", K.barrier_terms, Lc, tvar, tk, tsupp, tsmall, g, H)

    print(json.dumps(out))
    """
)


def run_path(disable_jit, sizes, repeat):
    env = dict(os.environ)
    if disable_jit:
        env["CDBEAM_DISABLE_JIT"] = "1"
    else:
        env.pop("CDBEAM_DISABLE_JIT", None)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps(sizes), str(repeat)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="40,80", help="comma list of matrix sizes")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    jit = run_path(False, sizes, args.repeat)
    plain = run_path(True, sizes, args.repeat)
    print(f"jit path enabled: {jit['jit']}   pure-numpy path enabled: {not plain['jit']}")
    print(f"{'kernel':28s} {'numba [ms]':>12s} {'numpy [ms]':>12s} {'speedup':>9s}")
    for name in jit["results"]:
        tj = min(jit["results"][name]) * 1e3
        tp = min(plain["results"][name]) * 1e3
        print(f"{name:28s} {tj:12.3f} {tp:12.3f} {tp / tj:8.1f}x")


if __name__ == "__main__":
    main()
