"""Time the numba kernels against their pure-NumPy fallbacks.

Run:  python3 benchmarks/bench_kernels.py [--spins N]

Both paths are imported directly (the env flag QMCMC_DISABLE_NUMBA only
selects which one the package binds at import time), so one process compares
them side by side and checks they agree.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qmcmc import _accel
from qmcmc.models import sample_pspin, sample_sk, spin_basis


def timed(fn, *args, repeats=5):
    fn(*args)  # warm-up / JIT compile
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def row(name, np_time, jit_time, diff):
    speedup = np_time / jit_time if jit_time > 0 else float("inf")
    print(f"{name:<28} numpy {np_time * 1e3:9.3f} ms   numba {jit_time * 1e3:9.3f} ms"
          f"   x{speedup:6.2f}   max|diff| {diff:.2e}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--spins", type=int, default=12)
    args = parser.parse_args()
    n = args.spins

    print(f"numba enabled in package: {_accel.NUMBA_ENABLED}; kernel size N={n} (2^N={1 << n})\n")

    t_np, a = timed(_accel._ising_energy_table_np, n)
    t_jit, b = timed(_accel._ising_energy_table_jit, n)
    row("ising_energy_table", t_np, t_jit, float(np.max(np.abs(a - b))))

    spins = spin_basis(n)
    sk = sample_sk(n, (1, 0))
    t_np, a = timed(_accel._sk_energy_table_np, spins, sk.couplings, sk.fields)
    t_jit, b = timed(_accel._sk_energy_table_jit, spins, sk.couplings, sk.fields)
    row("sk_energy_table", t_np, t_jit, float(np.max(np.abs(a - b))))

    ps = sample_pspin(n, 3, (1, 0))
    t_np, a = timed(_accel._pspin_energy_table_np, spins, ps.tuples, ps.couplings)
    t_jit, b = timed(_accel._pspin_energy_table_jit, spins, ps.tuples, ps.couplings)
    row("pspin_energy_table (p=3)", t_np, t_jit, float(np.max(np.abs(a - b))))

    dim = 1 << n
    m1 = np.zeros((dim, dim))
    m2 = np.zeros((dim, dim))
    t_np, _ = timed(_accel._transverse_fill_np, m1, n, 0.7)
    t_jit, _ = timed(_accel._transverse_fill_jit, m2, n, 0.7)
    row("transverse_fill", t_np, t_jit, float(np.max(np.abs(m1 - m2))))

    # Exhaustive cut scan on a 16-state reversible chain (the N=4 oracle).
    rng = np.random.default_rng(0)
    pi = rng.dirichlet(np.ones(16))
    kernel = rng.random((16, 16))
    kernel /= kernel.sum(axis=1, keepdims=True)
    flow = 0.5 * (pi[:, None] * kernel + (pi[:, None] * kernel).T)
    kernel = flow / pi[:, None]
    t_np, a = timed(_accel._min_cut_scan_np, flow, pi, repeats=3)
    t_jit, b = timed(_accel._min_cut_scan_jit, flow, pi, repeats=3)
    row("min_cut_scan (16 states)", t_np, t_jit, abs(a[1] - b[1]))
    assert a[0] == b[0], "cut scans disagree on the argmin subset"


if __name__ == "__main__":
    main()
