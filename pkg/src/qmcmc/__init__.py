"""Spectral-gap analysis of quantum-quench proposal Markov chains.

Builds measured-quench proposal matrices for classical spin models (periodic
chain, SK, p-spin), assembles the Metropolis chains they drive, computes
exact spectral gaps and mixing-time bounds, and evaluates the conductance /
eigenstate-overlap / IPR / free-energy bound ladder, including the free-
fermion closed form for the periodic chain.
"""

from .bottleneck import (
    BoundReport,
    Cut,
    bound_ladder,
    brute_force_min_cut,
    conductance,
    energy_threshold_cuts,
    equilibrium_flow,
    fg_distributions,
    make_cut,
    min_conductance_over_thresholds,
)
from .chain import (
    GapResult,
    TransitionMatrix,
    build_chain,
    detailed_balance_residual,
    exact_mixing_time,
    metropolis_acceptance,
    mixing_time_bounds,
    spectral_gap,
    time_averaged_transition,
    transition_matrix,
)
from .errors import (
    ConfigError,
    DetailedBalanceError,
    DimensionLimitError,
    PerturbativeRegimeError,
    QuadratureError,
)
from .ising_analytic import (
    IsingBoundResult,
    ParityGrid,
    bound_asymptotic,
    bound_finite_n,
    dispersion,
    gamma_lambda,
    momentum_grids,
    overlap_sum,
    overlap_sum_log,
)
from .config import ExperimentConfig, ModelSpec, ProposalSpec, load_config, parse_config
from .fits import ScalingFit, fit_scaling
from .models import (
    BoltzmannTable,
    DisorderSeed,
    IsingChain,
    PSpinModel,
    SKModel,
    SpinConfiguration,
    boltzmann,
    energy,
    energy_table,
    model_from_json,
    model_to_json,
    sample_pspin,
    sample_sk,
    spin_basis,
)
from .quench import (
    ProposalMatrix,
    QuenchHamiltonian,
    Spectrum,
    build_hamiltonian,
    diagonalize,
    effective_large_h_hamiltonian,
    eigenvalue_groups,
    ipr,
    ipr_window_average,
    local_proposal,
    perturbative_local_proposal,
    proposal_at_time,
    proposal_long_time,
    uniform_proposal,
)

__version__ = "0.1.0"
