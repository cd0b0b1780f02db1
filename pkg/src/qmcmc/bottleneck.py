"""Conductance bounds on the spectral gap and the eigenstate-overlap ladder.

For a reversible chain, the normalized equilibrium flow across any cut upper
bounds the gap. For energy-superlevel cuts B (every state in B above every
state in B^c) the flow of the long-time quench chain factorizes through two
eigenstate distributions f and g, whose overlap, purities (Rényi-2
entropies), and IPR averages give a ladder of successively weaker but more
physical bounds ending in a free-energy form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _accel
from .chain import TransitionMatrix, build_chain, DB_CHECK_TOL
from .errors import DetailedBalanceError
from .models import BoltzmannTable
from .quench import Spectrum, ipr as ipr_of, proposal_long_time

FLOW_SYMMETRY_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class Cut:
    """A bipartition of the configuration space with cached Boltzmann weight."""

    members: np.ndarray  # boolean indicator of S
    pi_weight: float
    threshold: float | None = None  # energy threshold for superlevel cuts

    @property
    def size(self) -> int:
        return int(np.sum(self.members))


def make_cut(members: np.ndarray, pi: np.ndarray, threshold: float | None = None) -> Cut:
    members = np.asarray(members, dtype=bool)
    if not members.any() or members.all():
        raise ValueError("a cut must be a nonempty proper subset")
    return Cut(members=members, pi_weight=float(pi[members].sum()), threshold=threshold)


def equilibrium_flow(pi: np.ndarray, chain: TransitionMatrix | np.ndarray, cut: Cut) -> float:
    """E(S, S^c) = Σ_{x∈S, y∉S} π(x) P(x, y); equals the reverse flow under reversibility."""
    P = chain.matrix if isinstance(chain, TransitionMatrix) else np.asarray(chain)
    s = cut.members
    forward = float(pi[s] @ P[np.ix_(s, ~s)].sum(axis=1))
    backward = float(pi[~s] @ P[np.ix_(~s, s)].sum(axis=1))
    scale = max(forward, backward, 1e-300)
    if abs(forward - backward) / scale > max(FLOW_SYMMETRY_TOL, 1e-13):
        raise DetailedBalanceError(
            f"cross-cut flows disagree ({forward:.6g} vs {backward:.6g}); chain is not reversible",
            residual=abs(forward - backward) / scale,
        )
    return forward


def conductance(pi: np.ndarray, chain: TransitionMatrix, cut: Cut) -> float:
    """Λ(B) = E(B, B^c) / (π(B) π(B^c)), an upper bound on the gap."""
    if isinstance(chain, TransitionMatrix) and chain.db_residual > DB_CHECK_TOL:
        raise DetailedBalanceError(
            "refusing the conductance bound for a non-reversible chain "
            f"(flow asymmetry {chain.db_residual:.3g})",
            residual=chain.db_residual,
        )
    weight = cut.pi_weight * (1.0 - cut.pi_weight)
    if weight <= 0.0:
        raise ValueError("degenerate cut: one side carries no Boltzmann weight")
    return equilibrium_flow(pi, chain, cut) / weight


def energy_threshold_cuts(energies: np.ndarray, pi: np.ndarray) -> list[Cut]:
    """Superlevel cuts B = {x : H_c(x) ≥ θ}, one per distinct level, while π(B) ≤ 1/2.

    Equal-energy states never straddle a threshold, so each B sits strictly
    above its complement in energy.
    """
    energies = np.asarray(energies)
    levels = np.unique(energies)[::-1]  # descending
    cuts: list[Cut] = []
    for theta in levels[:-1]:  # lowest level would give B = everything
        members = energies >= theta
        weight = float(pi[members].sum())
        if weight > 0.5:
            break
        cuts.append(Cut(members=members, pi_weight=weight, threshold=float(theta)))
    return cuts


def min_conductance_over_thresholds(
    pi: np.ndarray, chain: TransitionMatrix, energies: np.ndarray
) -> tuple[Cut, float]:
    """Tightest energy-superlevel bound: argmin over threshold cuts."""
    cuts = energy_threshold_cuts(energies, pi)
    if not cuts:
        raise ValueError("no admissible energy-threshold cut with π(B) ≤ 1/2")
    values = [conductance(pi, chain, cut) for cut in cuts]
    best = int(np.argmin(values))
    return cuts[best], float(values[best])


def brute_force_min_cut(pi: np.ndarray, chain: TransitionMatrix) -> tuple[Cut, float]:
    """Exact Λ_min over every subset with π(S) ≤ 1/2 (≤ 16 states)."""
    dim = len(pi)
    if dim > 16:
        raise ValueError("exhaustive cut scan is limited to 16 states (N ≤ 4)")
    P = chain.matrix if isinstance(chain, TransitionMatrix) else np.asarray(chain)
    flow = pi[:, None] * P
    mask, lam = _accel.min_cut_scan(flow, np.asarray(pi, dtype=np.float64))
    members = ((int(mask) >> np.arange(dim)) & 1).astype(bool)
    return make_cut(members, pi), float(lam)


# ---------------------------------------------------------------------------
# Eigenstate distributions and the bound ladder
# ---------------------------------------------------------------------------


def _require_energy_ordered(cut: Cut, energies: np.ndarray) -> None:
    above = energies[cut.members].min()
    below = energies[~cut.members].max()
    if not above > below:
        raise ValueError(
            "cut is not energy-ordered: the selected set must lie strictly above "
            f"its complement (min {above} vs max {below})"
        )


def fg_distributions(
    spectrum: Spectrum, table: BoltzmannTable, cut: Cut
) -> tuple[np.ndarray, np.ndarray, float]:
    """Eigenstate arrival distributions from B (f) and B^c (g), plus π̄(B^c).

    f(n) = Σ_{x∈B} π_B(x)|⟨x|n⟩|² weights departures by the Boltzmann measure
    restricted to B; g(n) averages |⟨n|y⟩|² uniformly over B^c. Both sum to 1.
    """
    _require_energy_ordered(cut, table.energies)
    V2 = spectrum.eigenvectors**2
    members = cut.members
    pi_B = table.pi[members] / cut.pi_weight
    f = pi_B @ V2[members]
    complement = ~members
    size_c = int(complement.sum())
    g = V2[complement].sum(axis=0) / size_c
    pi_bar_complement = float(table.pi[complement].sum()) / size_c
    return f, g, pi_bar_complement


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Gap bounds for one cut, tightest first, with their ingredients."""

    cut_threshold: float | None
    lambda_B: float
    fg_value: float
    cs_bound: float
    ipr_bound: float
    free_energy_bound: float
    f: np.ndarray
    g: np.ndarray
    pi_bar_complement: float
    renyi2_f: float
    renyi2_g: float
    mean_complement_energy: float
    transition_free_energy: float
    f_beta: float
    fg_lambda_discrepancy: float


def bound_ladder(
    spectrum: Spectrum,
    table: BoltzmannTable,
    cut: Cut,
    ipr_values: np.ndarray | None = None,
    transition: TransitionMatrix | None = None,
) -> BoundReport:
    """Evaluate Λ(B) and the overlap / Cauchy–Schwarz / IPR / free-energy ladder.

    Λ(B) uses the supplied long-time chain (or builds one from the spectrum at
    the table's β). For superlevel cuts every B → B^c move is downhill and
    accepted, so Λ(B) coincides with the f·g overlap value up to roundoff on
    nondegenerate spectra; the report carries their relative discrepancy
    rather than assuming it.
    """
    if table.beta <= 0:
        raise ValueError("the bound ladder needs β > 0 (free energies diverge at β = 0)")
    f, g, pi_bar_c = fg_distributions(spectrum, table, cut)
    if transition is None:
        transition = build_chain(table, proposal_long_time(spectrum))
    lambda_B = conductance(table.pi, transition, cut)
    fg_value = float(f @ g) / pi_bar_c

    sum_f2 = float(f @ f)
    sum_g2 = float(g @ g)
    cs_bound = math.sqrt(sum_f2 * sum_g2) / pi_bar_c

    if ipr_values is None:
        ipr_values = ipr_of(spectrum)
    members = cut.members
    pi_B = table.pi[members] / cut.pi_weight
    ipr_B = float(pi_B @ ipr_values[members])
    ipr_C = float(np.mean(ipr_values[~members]))
    ipr_bound = math.sqrt(ipr_B * ipr_C) / pi_bar_c

    s_f = -math.log(sum_f2)
    s_g = -math.log(sum_g2)
    e_c = float(np.mean(table.energies[~members]))
    f_c = e_c - (s_f + s_g) / (2.0 * table.beta)
    free_energy_bound = math.exp(-table.beta * (table.f_beta - f_c))

    scale = max(abs(lambda_B), abs(fg_value), 1e-300)
    return BoundReport(
        cut_threshold=cut.threshold,
        lambda_B=lambda_B,
        fg_value=fg_value,
        cs_bound=cs_bound,
        ipr_bound=ipr_bound,
        free_energy_bound=free_energy_bound,
        f=f,
        g=g,
        pi_bar_complement=pi_bar_c,
        renyi2_f=s_f,
        renyi2_g=s_g,
        mean_complement_energy=e_c,
        transition_free_energy=f_c,
        f_beta=table.f_beta,
        fg_lambda_discrepancy=abs(lambda_B - fg_value) / scale,
    )
