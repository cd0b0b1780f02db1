"""Dense quench Hamiltonians, exact diagonalization, and proposal matrices.

A quench proposal evolves a computational basis state under
H = H_c + h Σ_i σ^x_i for a time t and measures, giving
Q(x|y) = |⟨x|e^{−iHt}|y⟩|². The long-time (equilibrated) proposal keeps only
populations, Q(x|y) = Σ_n |⟨x|n⟩|² |⟨n|y⟩|², generalized to degenerate
spectra through eigenvalue-group projectors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .errors import PerturbativeRegimeError
from .models import (
    DEFAULT_MAX_SPINS,
    ClassicalModel,
    SKModel,
    check_dimension,
    energy_table,
    spin_basis,
)

STOCHASTIC_TOL = 1e-10
DEGENERACY_TOL_FACTOR = 1e-10


@dataclass(frozen=True, eq=False)
class QuenchHamiltonian:
    """Dense real symmetric 2^N × 2^N quench generator."""

    matrix: np.ndarray
    n_spins: int
    transverse_field: float
    variant: str = "transverse"  # or "xy_flip_flop" for the large-h effective form

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (ascending) and orthonormal eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def orthonormality_residual(self) -> float:
        V = self.eigenvectors
        return float(np.max(np.abs(V.T @ V - np.eye(self.dim))))

    def reconstruction_residual(self, matrix: np.ndarray) -> float:
        V, E = self.eigenvectors, self.eigenvalues
        rebuilt = (V * E) @ V.T
        scale = max(float(np.max(np.abs(matrix))), 1.0)
        return float(np.max(np.abs(rebuilt - matrix))) / scale


@dataclass(frozen=True, eq=False)
class ProposalMatrix:
    """Row-stochastic proposal Q with Q[y, x] = probability of proposing x from y."""

    matrix: np.ndarray
    symmetric: bool
    doubly_stochastic: bool

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _wrap_proposal(matrix: np.ndarray) -> ProposalMatrix:
    rows = matrix.sum(axis=1)
    cols = matrix.sum(axis=0)
    symmetric = float(np.max(np.abs(matrix - matrix.T))) <= STOCHASTIC_TOL
    doubly = (
        float(np.max(np.abs(rows - 1.0))) <= STOCHASTIC_TOL
        and float(np.max(np.abs(cols - 1.0))) <= STOCHASTIC_TOL
    )
    return ProposalMatrix(matrix=matrix, symmetric=symmetric, doubly_stochastic=doubly)


# ---------------------------------------------------------------------------
# Hamiltonian construction and diagonalization
# ---------------------------------------------------------------------------


def build_hamiltonian(
    model: ClassicalModel, h: float, max_spins: int = DEFAULT_MAX_SPINS
) -> QuenchHamiltonian:
    """H = diag(H_c) + h on every single-spin-flip (Hamming-1) pair."""
    n = model.n_spins
    check_dimension(n, max_spins)
    dim = 1 << n
    matrix = np.zeros((dim, dim))
    if h != 0.0:
        _accel.transverse_fill(matrix, n, float(h))
    matrix[np.diag_indices(dim)] = energy_table(model, max_spins=max_spins)
    return QuenchHamiltonian(matrix=matrix, n_spins=n, transverse_field=float(h))


def effective_large_h_hamiltonian(
    model: SKModel, h: float, max_spins: int = DEFAULT_MAX_SPINS
) -> QuenchHamiltonian:
    """Large-field effective generator −Σ J_ij(σ^z_iσ^z_j + σ^y_iσ^y_j) + h Σ σ^x_i.

    The pairwise part commutes with the transverse part, so the eigenvector
    set (hence the long-time proposal) does not depend on h; a small h only
    splits accidental degeneracies between sectors.
    """
    if not isinstance(model, SKModel):
        raise TypeError("the large-h effective form is defined for pairwise (SK) models")
    n = model.n_spins
    check_dimension(n, max_spins)
    dim = 1 << n
    spins = spin_basis(n)
    matrix = np.zeros((dim, dim))
    if h != 0.0:
        _accel.transverse_fill(matrix, n, float(h))
    idx = np.arange(dim)
    # σ^y_iσ^y_j has z-basis element −x_i x_j between configurations flipped at i,j.
    for i in range(n):
        for j in range(i + 1, n):
            J = model.couplings[i, j]
            if J == 0.0:
                continue
            flipped = idx ^ ((1 << i) | (1 << j))
            matrix[idx, flipped] += J * spins[:, i] * spins[:, j]
    quad = -0.5 * np.einsum("xi,ij,xj->x", spins, model.couplings, spins, optimize=True)
    matrix[np.diag_indices(dim)] = quad
    return QuenchHamiltonian(
        matrix=matrix, n_spins=n, transverse_field=float(h), variant="xy_flip_flop"
    )


def diagonalize(ham: QuenchHamiltonian | np.ndarray) -> Spectrum:
    """Full eigendecomposition of a real symmetric matrix."""
    matrix = ham.matrix if isinstance(ham, QuenchHamiltonian) else np.asarray(ham)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("expected a square matrix")
    if not np.allclose(matrix, matrix.T, atol=1e-12, rtol=0.0):
        raise ValueError("matrix must be symmetric")
    try:
        eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    except np.linalg.LinAlgError as exc:  # surface, never continue silently
        raise np.linalg.LinAlgError(f"eigensolver failed to converge: {exc}") from exc
    return Spectrum(eigenvalues=eigenvalues, eigenvectors=eigenvectors)


def eigenvalue_groups(eigenvalues: np.ndarray, tol: float | None = None) -> list[slice]:
    """Cluster an ascending eigenvalue vector into near-degenerate groups.

    Consecutive eigenvalues closer than ``tol`` (default 1e−10 × spectral
    range) are chained into one group.
    """
    eigenvalues = np.asarray(eigenvalues)
    if tol is None:
        spread = float(eigenvalues[-1] - eigenvalues[0])
        tol = DEGENERACY_TOL_FACTOR * max(spread, 1.0)
    gaps = np.diff(eigenvalues)
    breaks = np.nonzero(gaps >= tol)[0]
    starts = np.concatenate(([0], breaks + 1))
    stops = np.concatenate((breaks + 1, [len(eigenvalues)]))
    return [slice(int(a), int(b)) for a, b in zip(starts, stops)]


# ---------------------------------------------------------------------------
# Proposal matrices
# ---------------------------------------------------------------------------


def proposal_at_time(
    spectrum: Spectrum, t: float, max_block_bytes: int = 1 << 28
) -> ProposalMatrix:
    """Q(x|y) = |⟨x|e^{−iHt}|y⟩|² from the eigexpansion, blocked over rows."""
    if t < 0:
        raise ValueError("evolution time must be nonnegative")
    V = spectrum.eigenvectors
    dim = spectrum.dim
    phase = np.exp(-1j * spectrum.eigenvalues * t)
    block = max(1, min(dim, max_block_bytes // (16 * dim)))
    Q = np.empty((dim, dim))
    for start in range(0, dim, block):
        stop = min(start + block, dim)
        amplitudes = (V[start:stop] * phase) @ V.T
        Q[start:stop] = amplitudes.real**2 + amplitudes.imag**2
    return _wrap_proposal(Q)


def proposal_long_time(
    spectrum: Spectrum, degeneracy_tol: float | None = None
) -> ProposalMatrix:
    """Infinite-time-averaged proposal Σ_g |⟨x|P_g|y⟩|² over eigenvalue groups.

    With a fully nondegenerate spectrum every group is a singleton and this
    reduces to Σ_n |⟨x|n⟩|²|⟨n|y⟩|², whose diagonal is the IPR vector.
    """
    V = spectrum.eigenvectors
    groups = eigenvalue_groups(spectrum.eigenvalues, degeneracy_tol)
    singles = [g.start for g in groups if g.stop - g.start == 1]
    Q = np.zeros((spectrum.dim, spectrum.dim))
    if singles:
        W = V[:, singles] ** 2
        Q += W @ W.T
    for g in groups:
        if g.stop - g.start > 1:
            block = V[:, g]
            projector = block @ block.T
            Q += projector**2
    return _wrap_proposal(Q)


def ipr(spectrum: Spectrum) -> np.ndarray:
    """Inverse participation ratio of each configuration over the eigenbasis."""
    return np.sum(spectrum.eigenvectors**4, axis=1)


def ipr_window_average(ipr_values: np.ndarray, energies: np.ndarray, window) -> float:
    """Mean IPR over configurations whose classical energy lies in [lo, hi]."""
    lo, hi = window
    mask = (energies >= lo) & (energies <= hi)
    if not np.any(mask):
        raise ValueError(f"energy window [{lo}, {hi}] selects no configuration")
    return float(np.mean(np.asarray(ipr_values)[mask]))


def perturbative_local_proposal(
    model: ClassicalModel, h: float, max_spins: int = DEFAULT_MAX_SPINS
) -> ProposalMatrix:
    """Small-field single-flip proposal Q(x|y) = 2h²/(H_c(x)−H_c(y))².

    The diagonal absorbs the remaining mass. If any row's single-flip mass
    exceeds one the perturbative expansion is meaningless; the raised error
    carries the largest admissible field for this instance.
    """
    n = model.n_spins
    check_dimension(n, max_spins)
    energies = energy_table(model, max_spins=max_spins)
    dim = 1 << n
    idx = np.arange(dim)
    Q = np.zeros((dim, dim))
    with np.errstate(divide="ignore"):
        for i in range(n):
            flipped = idx ^ (1 << i)
            gap2 = (energies[flipped] - energies) ** 2
            Q[idx, flipped] = 2.0 * h * h / gap2
    off_mass = Q.sum(axis=1)
    worst = float(np.max(off_mass))
    if worst > 1.0:
        h_threshold = h / np.sqrt(worst) if np.isfinite(worst) else 0.0
        raise PerturbativeRegimeError(
            f"perturbative regime exceeded: a row carries single-flip mass {worst:.3g} > 1; "
            f"largest admissible h for this instance is {h_threshold:.6g}",
            h_threshold=float(h_threshold),
        )
    Q[np.diag_indices(dim)] = 1.0 - off_mass
    return _wrap_proposal(Q)


def uniform_proposal(n_spins: int) -> ProposalMatrix:
    """Pick any configuration uniformly: Q(x|y) = 2^{−N}."""
    dim = 1 << n_spins
    return _wrap_proposal(np.full((dim, dim), 1.0 / dim))


def local_proposal(n_spins: int) -> ProposalMatrix:
    """Flip one uniformly chosen spin: Q(x|y) = 1/N on Hamming-1 pairs."""
    dim = 1 << n_spins
    Q = np.zeros((dim, dim))
    _accel.transverse_fill(Q, n_spins, 1.0 / n_spins)
    return _wrap_proposal(Q)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def proposal_to_binary(proposal: ProposalMatrix, fp) -> None:
    """Row-major float64 dump with a little-endian uint64 dimension header."""
    fp.write(np.uint64(proposal.dim).tobytes())
    fp.write(np.ascontiguousarray(proposal.matrix, dtype="<f8").tobytes())


def proposal_from_binary(fp) -> ProposalMatrix:
    dim = int(np.frombuffer(fp.read(8), dtype="<u8")[0])
    data = np.frombuffer(fp.read(8 * dim * dim), dtype="<f8").reshape(dim, dim)
    return _wrap_proposal(np.array(data))


def proposal_to_csv(proposal: ProposalMatrix, fp, max_spins_for_csv: int = 8) -> None:
    if proposal.dim > (1 << max_spins_for_csv):
        raise ValueError("CSV export is limited to N <= 8 proposals")
    for row in proposal.matrix:
        fp.write(",".join(repr(float(v)) for v in row) + "\n")


def ipr_to_csv(ipr_values: np.ndarray, energies: np.ndarray, fp) -> None:
    fp.write("index,energy,ipr\n")
    for i, (e, v) in enumerate(zip(energies, ipr_values)):
        fp.write(f"{i},{float(e)!r},{float(v)!r}\n")
