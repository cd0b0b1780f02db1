"""Shared construction helpers for the test suite."""

from __future__ import annotations

import numpy as np

import qmcmc as q


def sk_chain(n_spins, seed, beta, h, proposal="long", t=None):
    """Build (model, table, spectrum, chain) for one SK instance."""
    model = q.sample_sk(n_spins, q.DisorderSeed(seed, 0))
    table = q.boltzmann(q.energy_table(model), beta)
    spectrum = q.diagonalize(q.build_hamiltonian(model, h))
    if proposal == "long":
        Q = q.proposal_long_time(spectrum)
    else:
        Q = q.proposal_at_time(spectrum, t)
    return model, table, spectrum, q.build_chain(table, Q)


def stationary_of(matrix):
    """Left Perron vector of a small row-stochastic matrix (brute oracle)."""
    w, v = np.linalg.eig(matrix.T)
    idx = int(np.argmax(w.real))
    pi = np.abs(v[:, idx].real)
    return pi / pi.sum()


def admissible_sk_for_perturbative(n_spins=6):
    """SK instance whose single-flip gaps are bounded away from zero.

    Distinct O(1) fields dominate weak couplings, so |ΔE| ≥ 2(min h_i − Σ|J|)
    for every single flip; random instances generically have near-degenerate
    flips that put h=0.05 outside the perturbative window.
    """
    rng = np.random.default_rng(5)
    n = n_spins
    J = np.zeros((n, n))
    iu = np.triu_indices(n, 1)
    J[iu] = rng.normal(0.0, 0.04, len(iu[0]))
    J = J + J.T
    fields = np.array([1.0, 1.31, 1.73, 2.29, 3.11, 4.13])[:n]
    return q.SKModel(couplings=J, fields=fields)
