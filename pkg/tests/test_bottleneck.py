"""Conductance machinery and the bound ladder."""

import numpy as np
import pytest

import qmcmc as q
from qmcmc.chain import TransitionMatrix

from .helpers import sk_chain


def _uniform_chain(dim):
    pi = np.full(dim, 1.0 / dim)
    P = np.full((dim, dim), 1.0 / dim)
    return TransitionMatrix(P, pi, 0.0)


def _block_chain():
    # two disconnected 2-state blocks, uniform pi
    P = np.array([
        [0.5, 0.5, 0.0, 0.0],
        [0.5, 0.5, 0.0, 0.0],
        [0.0, 0.0, 0.5, 0.5],
        [0.0, 0.0, 0.5, 0.5],
    ])
    pi = np.full(4, 0.25)
    return TransitionMatrix(P, pi, 0.0)


class TestEquilibriumFlow:
    def test_block_diagonal_has_no_flow(self):
        chain = _block_chain()
        cut = q.make_cut(np.array([True, True, False, False]), chain.pi)
        assert q.equilibrium_flow(chain.pi, chain, cut) == 0.0

    def test_uniform_rank_one_closed_form(self):
        dim = 8
        chain = _uniform_chain(dim)
        for m in (1, 3, 4):
            members = np.zeros(dim, dtype=bool)
            members[:m] = True
            cut = q.make_cut(members, chain.pi)
            expected = (m / dim) * (1.0 - m / dim)
            assert q.equilibrium_flow(chain.pi, chain, cut) == pytest.approx(expected, rel=1e-12)

    def test_matches_brute_force_double_sum(self):
        _, table, _, chain = sk_chain(4, 40, 2.0, 0.9)
        rng = np.random.default_rng(1)
        members = rng.random(16) < 0.4
        members[0] = True
        members[-1] = False
        cut = q.make_cut(members, table.pi)
        brute = sum(
            table.pi[x] * chain.matrix[x, y]
            for x in range(16) if members[x]
            for y in range(16) if not members[y]
        )
        assert q.equilibrium_flow(table.pi, chain, cut) == pytest.approx(brute, rel=1e-12)

    def test_flow_symmetry(self):
        _, table, _, chain = sk_chain(5, 41, 5.0, 1.3)
        energies = q.energy_table(q.sample_sk(5, (41, 0)))
        for cut in q.energy_threshold_cuts(energies, table.pi):
            s = cut.members
            forward = float(table.pi[s] @ chain.matrix[np.ix_(s, ~s)].sum(axis=1))
            backward = float(table.pi[~s] @ chain.matrix[np.ix_(~s, s)].sum(axis=1))
            assert forward == pytest.approx(backward, rel=1e-12)


class TestConductance:
    def test_block_diagonal_zero_and_gap_zero(self):
        chain = _block_chain()
        cut = q.make_cut(np.array([True, True, False, False]), chain.pi)
        assert q.conductance(chain.pi, chain, cut) == 0.0
        assert q.spectral_gap(chain).delta == 0.0

    def test_uniform_rank_one_is_one(self):
        chain = _uniform_chain(8)
        members = np.zeros(8, dtype=bool)
        members[:3] = True
        cut = q.make_cut(members, chain.pi)
        assert q.conductance(chain.pi, chain, cut) == pytest.approx(1.0, rel=1e-12)
        assert q.spectral_gap(chain).delta == pytest.approx(1.0, abs=1e-12)

    def test_ising_first_level_cut_is_tight(self):
        model = q.IsingChain(8)
        energies = q.energy_table(model)
        table = q.boltzmann(energies, 5.0)
        spectrum = q.diagonalize(q.build_hamiltonian(model, 0.6))
        chain = q.build_chain(table, q.proposal_long_time(spectrum))
        delta = q.spectral_gap(chain).delta
        members = energies >= -8 + 4  # B = S_1 ∪ higher
        lam = q.conductance(table.pi, chain, q.make_cut(members, table.pi))
        assert lam >= delta - 1e-10
        assert lam <= 10.0 * delta

    def test_upper_bounds_gap_on_random_chains(self):
        for seed in (42, 43, 44):
            model, table, _, chain = sk_chain(5, seed, 5.0, 0.8)
            delta = q.spectral_gap(chain).delta
            for cut in q.energy_threshold_cuts(table.energies, table.pi):
                assert q.conductance(table.pi, chain, cut) >= delta - 1e-10

    def test_refuses_irreversible(self):
        P = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
        pi = np.full(3, 1 / 3)
        from qmcmc.chain import detailed_balance_residual

        chain = TransitionMatrix(P, pi, detailed_balance_residual(P, pi))
        cut = q.make_cut(np.array([True, False, False]), pi)
        with pytest.raises(q.DetailedBalanceError):
            q.conductance(pi, chain, cut)


class TestCuts:
    def test_make_cut_validation(self):
        pi = np.full(4, 0.25)
        with pytest.raises(ValueError):
            q.make_cut(np.zeros(4, dtype=bool), pi)
        with pytest.raises(ValueError):
            q.make_cut(np.ones(4, dtype=bool), pi)

    def test_ising_threshold_cuts_follow_levels(self):
        energies = q.energy_table(q.IsingChain(4))
        table = q.boltzmann(energies, 5.0)
        cuts = q.energy_threshold_cuts(energies, table.pi)
        assert [c.threshold for c in cuts] == [4.0, 0.0]
        assert cuts[0].size == 2  # S_2
        assert cuts[1].size == 14  # S_1 ∪ S_2

    def test_two_level_single_cut(self):
        energies = np.array([0.0, 0.0, 1.0, 1.0])
        pi = q.boltzmann(energies, 1.0).pi
        cuts = q.energy_threshold_cuts(energies, pi)
        assert len(cuts) == 1 and cuts[0].size == 2

    def test_flat_landscape_has_no_cut(self):
        energies = np.zeros(4)
        pi = np.full(4, 0.25)
        assert q.energy_threshold_cuts(energies, pi) == []

    def test_ties_stay_together(self):
        energies = np.array([0.0, 1.0, 1.0, 2.0])
        pi = q.boltzmann(energies, 0.5).pi
        for cut in q.energy_threshold_cuts(energies, pi):
            inside = energies[cut.members]
            outside = energies[~cut.members]
            assert inside.min() > outside.max()


class TestMinimization:
    def test_threshold_minimum_ising(self):
        model = q.IsingChain(6)
        energies = q.energy_table(model)
        table = q.boltzmann(energies, 5.0)
        spectrum = q.diagonalize(q.build_hamiltonian(model, 0.5))
        chain = q.build_chain(table, q.proposal_long_time(spectrum))
        best_cut, best_value = q.min_conductance_over_thresholds(table.pi, chain, energies)
        top_cut = q.make_cut(energies >= energies.max(), table.pi)
        assert best_value <= q.conductance(table.pi, chain, top_cut) + 1e-15
        assert q.spectral_gap(chain).delta <= best_value + 1e-10

    def test_uniform_chain_conductance_is_one(self):
        energies = np.array([0.0, 1.0, 2.0, 3.0])
        pi = np.full(4, 0.25)
        chain = _uniform_chain(4)
        _, value = q.min_conductance_over_thresholds(pi, chain, energies)
        assert value == pytest.approx(1.0, rel=1e-12)

    def test_flat_landscape_raises(self):
        chain = _uniform_chain(4)
        with pytest.raises(ValueError):
            q.min_conductance_over_thresholds(chain.pi, chain, np.zeros(4))

    def test_brute_force_bounds_gap(self):
        for seed in (50, 51):
            _, table, _, chain = sk_chain(3, seed, 3.0, 0.9)
            _, lam_min = q.brute_force_min_cut(table.pi, chain)
            assert lam_min >= q.spectral_gap(chain).delta - 1e-10

    def test_brute_force_below_threshold_family(self):
        _, table, _, chain = sk_chain(4, 52, 4.0, 1.0)
        _, lam_min = q.brute_force_min_cut(table.pi, chain)
        _, lam_thresh = q.min_conductance_over_thresholds(
            table.pi, chain, table.energies
        )
        assert lam_thresh >= lam_min - 1e-12

    def test_brute_force_two_states(self):
        chain = _two_state()
        cut, lam = q.brute_force_min_cut(chain.pi, chain)
        flow = chain.pi[0] * chain.matrix[0, 1]
        assert lam == pytest.approx(flow / (chain.pi[0] * chain.pi[1]), rel=1e-12)

    def test_brute_force_block_diagonal_zero(self):
        chain = _block_chain()
        _, lam = q.brute_force_min_cut(chain.pi, chain)
        assert lam == 0.0

    def test_dimension_guard(self):
        chain = _uniform_chain(32)
        with pytest.raises(ValueError):
            q.brute_force_min_cut(chain.pi, chain)


def _two_state():
    P = np.array([[0.7, 0.3], [0.2, 0.8]])
    pi = np.array([0.4, 0.6])
    return TransitionMatrix(P, pi, 0.0)


class TestFGDistributions:
    def test_classical_limit_disjoint_supports(self):
        model = q.sample_sk(5, (60, 0))
        energies = q.energy_table(model)
        table = q.boltzmann(energies, 5.0)
        spectrum = q.diagonalize(q.build_hamiltonian(model, 0.0))
        cut = q.energy_threshold_cuts(energies, table.pi)[0]
        f, g, _ = q.fg_distributions(spectrum, table, cut)
        assert float(f @ g) == 0.0

    def test_distributions_normalized(self):
        model, table, spectrum, _ = sk_chain(6, 61, 5.0, 1.0)
        for cut in q.energy_threshold_cuts(table.energies, table.pi):
            f, g, pi_bar = q.fg_distributions(spectrum, table, cut)
            assert abs(f.sum() - 1.0) <= 1e-12
            assert abs(g.sum() - 1.0) <= 1e-12
            assert np.all(f >= 0) and np.all(g >= 0)
            assert pi_bar > 0

    def test_delocalized_eigenbasis_flat(self):
        import math

        n = 4
        hadamard = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        basis = np.array([[1.0]])
        for _ in range(n):
            basis = np.kron(hadamard, basis)
        spectrum = q.Spectrum(eigenvalues=np.arange(16.0), eigenvectors=basis)
        energies = q.energy_table(q.sample_sk(n, (62, 0)))
        table = q.boltzmann(energies, 2.0)
        cut = q.energy_threshold_cuts(energies, table.pi)[0]
        f, g, _ = q.fg_distributions(spectrum, table, cut)
        assert np.allclose(f, 1.0 / 16.0, atol=1e-12)
        assert np.allclose(g, 1.0 / 16.0, atol=1e-12)

    def test_rejects_unordered_cut(self):
        model, table, spectrum, _ = sk_chain(4, 63, 5.0, 1.0)
        members = np.zeros(16, dtype=bool)
        members[np.argsort(table.energies)[:4]] = True  # lowest states: not superlevel
        cut = q.make_cut(members, table.pi)
        with pytest.raises(ValueError):
            q.fg_distributions(spectrum, table, cut)

    def test_overlap_equals_conductance_for_superlevel_cuts(self):
        # downhill moves are always accepted, so Λ(B) = Σfg/π̄(B^c) exactly
        model, table, spectrum, chain = sk_chain(6, 64, 20.0, 0.9)
        for cut in q.energy_threshold_cuts(table.energies, table.pi)[:4]:
            f, g, pi_bar = q.fg_distributions(spectrum, table, cut)
            lam = q.conductance(table.pi, chain, cut)
            assert abs(lam - float(f @ g) / pi_bar) / lam <= 1e-6


class TestBoundLadder:
    def _report(self, seed, beta=5.0, h=0.8, n=6):
        model, table, spectrum, chain = sk_chain(n, seed, beta, h)
        cut = q.energy_threshold_cuts(table.energies, table.pi)[0]
        return (
            q.bound_ladder(spectrum, table, cut, transition=chain),
            q.spectral_gap(chain).delta,
        )

    def test_ordering(self):
        for seed in (70, 71, 72):
            report, delta = self._report(seed)
            assert delta <= report.lambda_B + 1e-10
            assert report.fg_value <= report.cs_bound + 1e-10
            assert report.cs_bound <= report.ipr_bound + 1e-10
            assert report.cs_bound <= report.free_energy_bound + 1e-10

    def test_classical_limit_values(self):
        model = q.sample_sk(5, (73, 0))
        energies = q.energy_table(model)
        table = q.boltzmann(energies, 5.0)
        spectrum = q.diagonalize(q.build_hamiltonian(model, 0.0))
        cut = q.energy_threshold_cuts(energies, table.pi)[0]
        report = q.bound_ladder(spectrum, table, cut)
        assert report.fg_value == 0.0
        assert report.cs_bound >= 0.0
        # all IPRs are one in the classical limit
        assert report.ipr_bound == pytest.approx(1.0 / report.pi_bar_complement, rel=1e-10)

    def test_delocalized_ipr_term(self):
        import math

        n = 4
        hadamard = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        basis = np.array([[1.0]])
        for _ in range(n):
            basis = np.kron(hadamard, basis)
        spectrum = q.Spectrum(eigenvalues=np.arange(16.0), eigenvectors=basis)
        model = q.sample_sk(n, (74, 0))
        energies = q.energy_table(model)
        table = q.boltzmann(energies, 2.0)
        cut = q.energy_threshold_cuts(energies, table.pi)[0]
        report = q.bound_ladder(spectrum, table, cut)
        assert report.ipr_bound == pytest.approx(
            (1.0 / 16.0) / report.pi_bar_complement, rel=1e-10
        )

    def test_renyi_entropies_consistent_with_cs(self):
        import math

        report, _ = self._report(75)
        reconstructed = math.exp(-(report.renyi2_f + report.renyi2_g) / 2.0)
        assert report.cs_bound == pytest.approx(
            reconstructed / report.pi_bar_complement, rel=1e-12
        )

    def test_discrepancy_tracked(self):
        report, _ = self._report(76, beta=20.0)
        assert report.fg_lambda_discrepancy <= 1e-6

    def test_rejects_zero_beta(self):
        model = q.sample_sk(4, (77, 0))
        energies = q.energy_table(model)
        table = q.boltzmann(energies, 0.0)
        spectrum = q.diagonalize(q.build_hamiltonian(model, 1.0))
        cut = q.energy_threshold_cuts(energies, table.pi)[0]
        with pytest.raises(ValueError):
            q.bound_ladder(spectrum, table, cut)
