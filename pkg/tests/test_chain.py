"""Metropolis chains, spectral gaps, mixing times, time averaging."""

import math

import numpy as np
import pytest

import qmcmc as q

from .helpers import sk_chain, stationary_of


def _two_state_chain(p01, p10):
    P = np.array([[1.0 - p01, p01], [p10, 1.0 - p10]])
    pi = stationary_of(P)
    from qmcmc.chain import TransitionMatrix, detailed_balance_residual

    return TransitionMatrix(matrix=P, pi=pi, db_residual=detailed_balance_residual(P, pi))


class TestAcceptance:
    def test_equal_energies_accept(self):
        pi = np.full(4, 0.25)
        Q = q.uniform_proposal(2)
        A = q.metropolis_acceptance(pi, Q)
        assert np.allclose(A, 1.0)

    def test_uphill_formula(self):
        # ΔE = +2 at β = 5 with symmetric proposals: A = e^{-10}
        table = q.boltzmann(np.array([0.0, 2.0]), 5.0)
        A = q.metropolis_acceptance(table, q.uniform_proposal(1))
        assert A[0, 1] == pytest.approx(math.exp(-10.0), rel=1e-12)

    def test_downhill_clamps_to_one(self):
        table = q.boltzmann(np.array([0.0, 2.0]), 5.0)
        A = q.metropolis_acceptance(table, q.uniform_proposal(1))
        assert A[1, 0] == 1.0

    def test_zero_proposal_convention(self):
        table = q.boltzmann(np.array([0.0, 1.0, 2.0, 0.5]), 1.0)
        A = q.metropolis_acceptance(table, q.local_proposal(2))
        assert A[0, 3] == 0.0 and A[3, 0] == 0.0  # Hamming-2 pair

    def test_hastings_ratio_for_asymmetric_proposal(self):
        pi = np.array([0.7, 0.3])
        Q = np.array([[0.4, 0.6], [0.9, 0.1]])
        A = q.metropolis_acceptance(pi, Q)
        assert A[0, 1] == pytest.approx(min(1.0, (0.3 * 0.9) / (0.7 * 0.6)), rel=1e-12)
        assert A[1, 0] == pytest.approx(min(1.0, (0.7 * 0.6) / (0.3 * 0.9)), rel=1e-12)


class TestTransitionMatrix:
    def test_infinite_temperature_keeps_proposal(self):
        Q = q.uniform_proposal(2)
        table = q.boltzmann(q.energy_table(q.sample_sk(2, (1, 0))), 0.0)
        chain = q.build_chain(table, Q)
        assert np.allclose(chain.matrix, Q.matrix, atol=1e-15)

    def test_identity_proposal_is_absorbing(self):
        table = q.boltzmann(np.array([0.0, 1.0]), 1.0)
        from qmcmc.quench import ProposalMatrix

        Q = ProposalMatrix(matrix=np.eye(2), symmetric=True, doubly_stochastic=True)
        chain = q.build_chain(table, Q)
        assert np.array_equal(chain.matrix, np.eye(2))

    def test_rows_sum_to_one(self):
        _, _, _, chain = sk_chain(5, 31, 5.0, 0.8)
        assert np.max(np.abs(chain.matrix.sum(axis=1) - 1.0)) <= 1e-10

    def test_detailed_balance_residual_small(self):
        _, _, _, chain = sk_chain(5, 32, 5.0, 1.2)
        assert chain.db_residual <= 1e-12

    def test_inconsistent_inputs_raise(self):
        Q = q.uniform_proposal(1)
        with pytest.raises(ValueError):
            q.transition_matrix(Q, np.full((2, 2), 3.0), np.array([0.5, 0.5]))


class TestSpectralGap:
    def test_identity_is_reducible_with_zero_gap(self):
        from qmcmc.chain import TransitionMatrix

        chain = TransitionMatrix(np.eye(4), np.full(4, 0.25), 0.0)
        result = q.spectral_gap(chain)
        assert result.delta == 0.0 and result.reducible

    def test_two_state_trace_identity(self):
        chain = _two_state_chain(0.3, 0.2)
        result = q.spectral_gap(chain)
        assert result.delta == pytest.approx(0.5, rel=1e-12)
        assert result.lambda2_abs == pytest.approx(0.5, rel=1e-12)
        assert not result.reducible

    def test_uniform_rank_one_has_unit_gap(self):
        table = q.boltzmann(q.energy_table(q.sample_sk(3, (2, 0))), 0.0)
        chain = q.build_chain(table, q.uniform_proposal(3))
        result = q.spectral_gap(chain)
        assert result.delta == pytest.approx(1.0, abs=1e-12)

    def test_negative_eigenvalue_counts(self):
        # period-2-like chain: eigenvalues {1, -0.9}, gap is 0.1
        chain = _two_state_chain(0.95, 0.95)
        result = q.spectral_gap(chain)
        assert result.lambda2_abs == pytest.approx(0.9, rel=1e-12)
        assert result.delta == pytest.approx(0.1, rel=1e-10)

    def test_refuses_irreversible_chain(self):
        P = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        pi = np.full(3, 1 / 3)
        from qmcmc.chain import TransitionMatrix, detailed_balance_residual

        chain = TransitionMatrix(P, pi, detailed_balance_residual(P, pi))
        with pytest.raises(q.DetailedBalanceError):
            q.spectral_gap(chain)


class TestMixingTimeBounds:
    def test_spot_values(self):
        lower, upper = q.mixing_time_bounds(0.5, 1.0 / 16.0, 0.05)
        assert lower == pytest.approx(math.log(10.0), rel=1e-12)
        assert upper == pytest.approx(2.0 * math.log(320.0), rel=1e-12)

    def test_unit_gap_zero_lower(self):
        lower, _ = q.mixing_time_bounds(1.0, 0.1, 0.05)
        assert lower == 0.0

    def test_zero_gap_sentinel(self):
        assert q.mixing_time_bounds(0.0, 0.1, 0.05) == (float("inf"), float("inf"))

    def test_eps_validation(self):
        with pytest.raises(ValueError):
            q.mixing_time_bounds(0.5, 0.1, 0.7)


class TestExactMixingTime:
    def test_rank_one_mixes_in_one_step(self):
        table = q.boltzmann(q.energy_table(q.sample_sk(3, (4, 0))), 0.0)
        chain = q.build_chain(table, q.uniform_proposal(3))
        assert q.exact_mixing_time(chain, 0.05) == 1

    def test_identity_hits_cap(self):
        from qmcmc.chain import TransitionMatrix

        chain = TransitionMatrix(np.eye(2), np.full(2, 0.5), 0.0)
        with pytest.raises(RuntimeError):
            q.exact_mixing_time(chain, 0.05, max_steps=500)

    def test_dimension_cap(self):
        from qmcmc.chain import TransitionMatrix

        dim = 512
        chain = TransitionMatrix(np.eye(dim), np.full(dim, 1.0 / dim), 0.0)
        with pytest.raises(ValueError):
            q.exact_mixing_time(chain, 0.05)

    def test_sandwich_on_random_chains(self):
        for seed, beta in ((7, 1.0), (8, 0.7)):
            _, table, _, chain = sk_chain(4, seed, beta, 1.0)
            result = q.spectral_gap(chain)
            assert result.delta > 0.01
            eps = 0.05
            steps = q.exact_mixing_time(chain, eps)
            lower, upper = q.mixing_time_bounds(result.delta, table.pi_min, eps)
            assert lower <= steps <= upper


class TestTimeAveraging:
    def test_identical_inputs_unchanged(self):
        _, _, _, chain = sk_chain(4, 9, 2.0, 0.8)
        mean = q.time_averaged_transition([chain, chain, chain])
        assert np.allclose(mean.matrix, chain.matrix, atol=1e-15)

    def test_two_state_convexity_edge(self):
        from qmcmc.chain import TransitionMatrix

        pi = np.full(2, 0.5)
        frozen = TransitionMatrix(np.eye(2), pi, 0.0)
        swap = TransitionMatrix(np.array([[0.0, 1.0], [1.0, 0.0]]), pi, 0.0)
        mean = q.time_averaged_transition([frozen, swap])
        assert np.allclose(mean.matrix, 0.5)
        gaps = [q.spectral_gap(c).delta for c in (frozen, swap)]
        assert q.spectral_gap(mean).delta == pytest.approx(1.0)
        assert q.spectral_gap(mean).delta >= np.mean(gaps) - 1e-10

    def test_gap_convexity_random_times(self):
        model, table, spectrum, _ = sk_chain(6, 10, 3.0, 1.1)
        rng = np.random.default_rng(0)
        chains = [
            q.build_chain(table, q.proposal_at_time(spectrum, float(t)))
            for t in rng.uniform(0.5, 30.0, size=20)
        ]
        mean_chain = q.time_averaged_transition(chains)
        mean_of_gaps = float(np.mean([q.spectral_gap(c).delta for c in chains]))
        assert q.spectral_gap(mean_chain).delta >= mean_of_gaps - 1e-10

    def test_mismatched_pi_rejected(self):
        _, _, _, a = sk_chain(4, 11, 2.0, 0.8)
        _, _, _, b = sk_chain(4, 12, 2.0, 0.8)
        with pytest.raises(ValueError):
            q.time_averaged_transition([a, b])

    def test_preserves_detailed_balance(self):
        _, table, spectrum, _ = sk_chain(5, 13, 4.0, 0.9)
        chains = [
            q.build_chain(table, q.proposal_at_time(spectrum, t)) for t in (1.0, 2.5, 7.0)
        ]
        mean = q.time_averaged_transition(chains)
        assert mean.db_residual <= 1e-12
