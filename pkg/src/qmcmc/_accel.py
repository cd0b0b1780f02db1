"""Hot inner kernels: numba-jitted loops with pure-NumPy fallbacks.

The jitted path is used whenever numba is importable; set
``QMCMC_DISABLE_NUMBA=1`` to force the NumPy implementations. Both paths are
exercised by the test suite and timed against each other in
``benchmarks/bench_kernels.py``. Everything BLAS/LAPACK-bound (eigh, matmul)
lives outside this module; only loop-structured assembly and enumeration
kernels benefit from the JIT.
"""

from __future__ import annotations

import os

import numpy as np

_DISABLED = os.environ.get("QMCMC_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _DISABLED:
        raise ImportError("numba disabled via QMCMC_DISABLE_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:  # pragma: no cover - exercised via env flag in the benchmark
    NUMBA_ENABLED = False

    def njit(*args, **kwargs):
        """No-op decorator standing in for numba.njit."""

        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


# ---------------------------------------------------------------------------
# Energy tables
# ---------------------------------------------------------------------------


def _ising_energy_table_np(n_spins: int) -> np.ndarray:
    dim = np.uint64(1) << np.uint64(n_spins)
    idx = np.arange(dim, dtype=np.uint64)
    # Rotate the bit pattern by one site; set bits of idx^rot mark broken bonds.
    rot = (idx >> np.uint64(1)) | ((idx & np.uint64(1)) << np.uint64(n_spins - 1))
    broken = np.bitwise_count(idx ^ rot).astype(np.int64)
    return (2 * broken - n_spins).astype(np.float64)


@njit(cache=True)
def _ising_energy_table_jit(n_spins: int) -> np.ndarray:  # pragma: no cover - jitted
    dim = 1 << n_spins
    out = np.empty(dim, dtype=np.float64)
    for x in range(dim):
        broken = 0
        for i in range(n_spins):
            a = (x >> i) & 1
            b = (x >> ((i + 1) % n_spins)) & 1
            if a != b:
                broken += 1
        out[x] = 2.0 * broken - n_spins
    return out


def _sk_energy_table_np(spins: np.ndarray, couplings: np.ndarray, fields: np.ndarray) -> np.ndarray:
    # couplings is symmetric with zero diagonal, so the i<j sum is half the quadratic form.
    interaction = -0.5 * np.einsum("xi,ij,xj->x", spins, couplings, spins, optimize=True)
    return interaction + spins @ fields


@njit(cache=True)
def _sk_energy_table_jit(spins, couplings, fields):  # pragma: no cover - jitted
    dim, n = spins.shape
    out = np.empty(dim, dtype=np.float64)
    for x in range(dim):
        acc = 0.0
        for i in range(n):
            si = spins[x, i]
            acc += fields[i] * si
            for j in range(i + 1, n):
                acc -= couplings[i, j] * si * spins[x, j]
        out[x] = acc
    return out


def _pspin_energy_table_np(spins: np.ndarray, tuples: np.ndarray, couplings: np.ndarray) -> np.ndarray:
    out = np.zeros(spins.shape[0], dtype=np.float64)
    for m in range(tuples.shape[0]):
        prod = spins[:, tuples[m, 0]].copy()
        for a in range(1, tuples.shape[1]):
            prod *= spins[:, tuples[m, a]]
        out -= couplings[m] * prod
    return out


@njit(cache=True)
def _pspin_energy_table_jit(spins, tuples, couplings):  # pragma: no cover - jitted
    dim = spins.shape[0]
    n_terms, order = tuples.shape
    out = np.zeros(dim, dtype=np.float64)
    for x in range(dim):
        acc = 0.0
        for m in range(n_terms):
            prod = 1.0
            for a in range(order):
                prod *= spins[x, tuples[m, a]]
            acc -= couplings[m] * prod
        out[x] = acc
    return out


# ---------------------------------------------------------------------------
# Transverse-field (single-flip) off-diagonal fill
# ---------------------------------------------------------------------------


def _transverse_fill_np(matrix: np.ndarray, n_spins: int, amplitude: float) -> None:
    idx = np.arange(matrix.shape[0])
    for i in range(n_spins):
        matrix[idx, idx ^ (1 << i)] = amplitude


@njit(cache=True)
def _transverse_fill_jit(matrix, n_spins, amplitude):  # pragma: no cover - jitted
    dim = matrix.shape[0]
    for x in range(dim):
        for i in range(n_spins):
            matrix[x, x ^ (1 << i)] = amplitude


# ---------------------------------------------------------------------------
# Exhaustive bottleneck scan (oracle for <= 16 states)
# ---------------------------------------------------------------------------


def _min_cut_scan_np(flow: np.ndarray, pi: np.ndarray) -> tuple[int, float]:
    dim = pi.shape[0]
    n_masks = 1 << dim
    masks = np.arange(1, n_masks - 1, dtype=np.uint32)
    members = ((masks[:, None] >> np.arange(dim, dtype=np.uint32)[None, :]) & 1).astype(np.float64)
    pi_s = members @ pi
    keep = pi_s <= 0.5
    members = members[keep]
    pi_s = pi_s[keep]
    masks = masks[keep]
    # E(S, S^c) = s·F·1 − s·F·s with F the equilibrium-flow matrix.
    row_mass = members @ (flow @ np.ones(dim))
    self_mass = np.einsum("md,md->m", members @ flow, members)
    lam = (row_mass - self_mass) / (pi_s * (1.0 - pi_s))
    best = int(np.argmin(lam))
    return int(masks[best]), float(lam[best])


@njit(cache=True)
def _min_cut_scan_jit(flow, pi):  # pragma: no cover - jitted
    dim = pi.shape[0]
    best_lambda = np.inf
    best_mask = -1
    for mask in range(1, (1 << dim) - 1):
        pi_s = 0.0
        for x in range(dim):
            if (mask >> x) & 1:
                pi_s += pi[x]
        if pi_s > 0.5:
            continue
        cross = 0.0
        for x in range(dim):
            if (mask >> x) & 1:
                for y in range(dim):
                    if not (mask >> y) & 1:
                        cross += flow[x, y]
        lam = cross / (pi_s * (1.0 - pi_s))
        if lam < best_lambda:
            best_lambda = lam
            best_mask = mask
    return best_mask, best_lambda


if NUMBA_ENABLED:
    ising_energy_table = _ising_energy_table_jit
    sk_energy_table = _sk_energy_table_jit
    pspin_energy_table = _pspin_energy_table_jit
    transverse_fill = _transverse_fill_jit
    min_cut_scan = _min_cut_scan_jit
else:
    ising_energy_table = _ising_energy_table_np
    sk_energy_table = _sk_energy_table_np
    pspin_energy_table = _pspin_energy_table_np
    transverse_fill = _transverse_fill_np
    min_cut_scan = _min_cut_scan_np
