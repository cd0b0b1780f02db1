"""Metropolis–Hastings chains, exact spectral gaps, and mixing-time bounds.

All matrices are row-stochastic with rows indexed by the current state:
P[y, x] is the probability of moving y → x. Acceptance ratios are evaluated
through log-π differences so that extreme β neither overflows nor breaks
detailed balance beyond roundoff.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DetailedBalanceError
from .models import BoltzmannTable
from .quench import ProposalMatrix

DB_CHECK_TOL = 1e-10
REDUCIBLE_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic Markov kernel with its stationary distribution."""

    matrix: np.ndarray
    pi: np.ndarray
    db_residual: float

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class GapResult:
    """Spectral gap δ = 1 − |λ₂| with reducibility bookkeeping."""

    delta: float
    lambda2_abs: float
    reducible: bool


def _log_pi_of(pi) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(pi, BoltzmannTable):
        return pi.pi, pi.log_pi
    pi = np.asarray(pi, dtype=np.float64)
    if np.any(pi <= 0):
        raise ValueError("stationary distribution must be strictly positive")
    return pi, np.log(pi)


def detailed_balance_residual(matrix: np.ndarray, pi: np.ndarray) -> float:
    """Largest relative asymmetry of the equilibrium flow π(y)P(y,x)."""
    flow = pi[:, None] * matrix
    num = np.abs(flow - flow.T)
    den = np.maximum(flow, flow.T)
    mask = den > 0
    if not np.any(mask):
        return 0.0
    return float(np.max(num[mask] / den[mask]))


def metropolis_acceptance(pi, proposal: ProposalMatrix | np.ndarray) -> np.ndarray:
    """A(x|y) = min(1, [π(x)Q(y|x)] / [π(y)Q(x|y)]), zero where Q(x|y) = 0.

    The ratio is assembled from log-π differences and log-Q differences; both
    difference matrices are exactly antisymmetric in floating point, which
    keeps the constructed chain reversible to machine precision.
    """
    Q = proposal.matrix if isinstance(proposal, ProposalMatrix) else np.asarray(proposal)
    _, log_pi = _log_pi_of(pi)
    exponent = log_pi[None, :] - log_pi[:, None]
    valid = (Q > 0) & (Q.T > 0)
    if not (isinstance(proposal, ProposalMatrix) and proposal.symmetric):
        with np.errstate(divide="ignore"):
            log_q = np.where(Q > 0, np.log(Q), 0.0)
        exponent = exponent + np.where(valid, log_q.T - log_q, 0.0)
    A = np.exp(np.minimum(exponent, 0.0))
    A[~valid] = 0.0
    return A


def transition_matrix(
    proposal: ProposalMatrix | np.ndarray, acceptance: np.ndarray, pi
) -> TransitionMatrix:
    """Two-step kernel: off-diagonal Q·A, diagonal absorbing the rejected mass."""
    Q = proposal.matrix if isinstance(proposal, ProposalMatrix) else np.asarray(proposal)
    pi_vec, _ = _log_pi_of(pi)
    P = Q * acceptance
    off_mass = P.sum(axis=1) - np.diag(P)
    diag = 1.0 - off_mass
    worst = float(np.min(diag))
    if worst < -1e-10:
        raise ValueError(
            f"negative holding probability {worst:.3g}: proposal and acceptance are inconsistent"
        )
    P[np.diag_indices(P.shape[0])] = np.maximum(diag, 0.0)
    return TransitionMatrix(
        matrix=P, pi=pi_vec, db_residual=detailed_balance_residual(P, pi_vec)
    )


def build_chain(table: BoltzmannTable, proposal: ProposalMatrix) -> TransitionMatrix:
    """Convenience wrapper: Metropolis acceptance followed by kernel assembly."""
    A = metropolis_acceptance(table, proposal)
    return transition_matrix(proposal, A, table)


def spectral_gap(chain: TransitionMatrix, db_tol: float = DB_CHECK_TOL) -> GapResult:
    """Exact gap via the symmetrized kernel E = D_π^{1/2} P D_π^{−1/2}.

    Detailed balance is a precondition (it makes E symmetric with a real
    spectrum); chains violating it beyond ``db_tol`` are refused. Eigenvalue-1
    multiplicity above one marks the chain reducible with δ = 0.
    """
    if chain.db_residual > db_tol:
        raise DetailedBalanceError(
            f"chain is not reversible: relative flow asymmetry {chain.db_residual:.3g} "
            f"exceeds {db_tol:.3g}",
            residual=chain.db_residual,
        )
    sqrt_pi = np.sqrt(chain.pi)
    E = (sqrt_pi[:, None] * chain.matrix) / sqrt_pi[None, :]
    eigenvalues = np.linalg.eigvalsh(E)
    unit_multiplicity = int(np.sum(eigenvalues > 1.0 - REDUCIBLE_TOL))
    if unit_multiplicity > 1:
        return GapResult(delta=0.0, lambda2_abs=1.0, reducible=True)
    if len(eigenvalues) > 1:
        second = max(abs(float(eigenvalues[0])), abs(float(eigenvalues[-2])))
    else:
        second = 0.0
    second = min(second, 1.0)
    return GapResult(delta=1.0 - second, lambda2_abs=second, reducible=False)


def mixing_time_bounds(delta: float, pi_min: float, eps: float) -> tuple[float, float]:
    """Two-sided mixing-time estimate from the gap and the smallest weight."""
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    if delta <= 0:
        return (float("inf"), float("inf"))
    if delta > 1:
        raise ValueError("delta must lie in (0, 1]")
    lower = (1.0 / delta - 1.0) * math.log(1.0 / (2.0 * eps))
    upper = (1.0 / delta) * math.log(1.0 / (eps * pi_min))
    return (lower, upper)


def exact_mixing_time(
    chain: TransitionMatrix, eps: float, max_steps: int = 10**6, max_states: int = 256
) -> int:
    """Smallest s with max_x TV(P^s(x, ·), π) ≤ ε, by repeated multiplication."""
    if chain.dim > max_states:
        raise ValueError(f"state space of {chain.dim} exceeds the exact-iteration cap {max_states}")
    if not 0 < eps < 0.5:
        raise ValueError("eps must lie in (0, 1/2)")
    P = chain.matrix
    current = P.copy()
    for step in range(1, max_steps + 1):
        tv = 0.5 * float(np.max(np.sum(np.abs(current - chain.pi[None, :]), axis=1)))
        if tv <= eps:
            return step
        current = current @ P
    raise RuntimeError(f"chain failed to mix within {max_steps} steps (cap reached)")


def time_averaged_transition(chains: list[TransitionMatrix]) -> TransitionMatrix:
    """Entrywise mean of kernels sharing one stationary distribution."""
    if not chains:
        raise ValueError("need at least one transition matrix")
    pi = chains[0].pi
    for other in chains[1:]:
        if other.matrix.shape != chains[0].matrix.shape:
            raise ValueError("mismatched dimensions")
        if not np.allclose(other.pi, pi, rtol=1e-12, atol=1e-15):
            raise ValueError("mismatched stationary distributions")
    mean = np.mean([c.matrix for c in chains], axis=0)
    return TransitionMatrix(matrix=mean, pi=pi, db_residual=detailed_balance_residual(mean, pi))
