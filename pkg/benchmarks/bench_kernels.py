"""Compare the numba kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--size 24] [--reps 200]

Part one times rref and matmul over F_4 and F_7 in-process and checks that both
paths agree. Part two runs one local-model orbit count end to end twice, once with
WITTDISP_DISABLE_NUMBA=1, and compares wall time and output bytes.
"""
import argparse
import os
import subprocess
import sys
import time

import numpy as np

from wittdisp import _kernels
from wittdisp.rings import finite_field


def timed(fn, reps):
    fn()
    t0 = time.perf_counter()
    for _ in range(reps):
        out = fn()
    return (time.perf_counter() - t0) / reps, out


def kernel_table(size, reps):
    if not _kernels.NUMBA_AVAILABLE:
        print("numba unavailable or disabled; only the fallback is timed")
    rng = np.random.default_rng(0)
    for q in (4, 7):
        F = finite_field(q)
        add, mul, neg, inv = _kernels.field_tables(F)
        A = rng.integers(0, q, size=(size, size)).astype(np.int64)
        B = rng.integers(0, q, size=(size, size)).astype(np.int64)
        rows = []
        t_np, r_np = timed(lambda: _kernels._rref_numpy(A, add, mul, neg, inv), reps)
        t_mm_np, m_np = timed(lambda: _kernels._matmul_numpy(A, B, add, mul), reps)
        rows.append(("numpy", t_np, t_mm_np))
        if _kernels.NUMBA_AVAILABLE:
            t_nb, r_nb = timed(lambda: _kernels.rref_kernel(A, add, mul, neg, inv), reps)
            t_mm_nb, m_nb = timed(lambda: _kernels.matmul_kernel(A, B, add, mul), reps)
            assert np.array_equal(r_np[0], r_nb[0]) and r_np[1] == r_nb[1]
            assert np.array_equal(m_np, m_nb)
            rows.append(("numba", t_nb, t_mm_nb))
        for name, t1, t2 in rows:
            print(f"F_{q:<3} n={size:<4} {name:6} rref {t1 * 1e6:9.1f} us   matmul {t2 * 1e6:9.1f} us")


def end_to_end():
    cmd = [sys.executable, "-m", "wittdisp.cli", "localmodel", "--g", "2", "--J", "full"]
    outs = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, WITTDISP_DISABLE_NUMBA=flag)
        t0 = time.perf_counter()
        res = subprocess.run(cmd, env=env, capture_output=True, check=True)
        outs[label] = res.stdout
        print(f"localmodel g=2 J=Z  {label:6} {time.perf_counter() - t0:6.2f} s")
    print("outputs identical:", outs["numba"] == outs["numpy"])


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, default=24)
    ap.add_argument("--reps", type=int, default=200)
    args = ap.parse_args()
    kernel_table(args.size, args.reps)
    end_to_end()
