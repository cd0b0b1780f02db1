"""Spin encoding, Hamiltonian energies, Boltzmann tables, disorder sampling."""

import io as stdio
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import qmcmc as q


class TestSpinConfiguration:
    @given(st.integers(min_value=1, max_value=12), st.data())
    @settings(max_examples=60, deadline=None)
    def test_roundtrip(self, n, data):
        index = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
        x = q.SpinConfiguration(index, n)
        assert q.SpinConfiguration.from_spins(x.spins) == x

    @given(st.integers(min_value=2, max_value=10), st.data())
    @settings(max_examples=60, deadline=None)
    def test_hamming_distance_counts_differing_spins(self, n, data):
        i = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
        j = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
        a, b = q.SpinConfiguration(i, n), q.SpinConfiguration(j, n)
        assert a.hamming_distance(b) == int(np.sum(a.spins != b.spins))

    def test_bit_convention(self):
        # cleared bit 0 means x_0 = +1
        assert q.SpinConfiguration(0, 3).spins.tolist() == [1.0, 1.0, 1.0]
        assert q.SpinConfiguration(1, 3).spins.tolist() == [-1.0, 1.0, 1.0]

    def test_out_of_range_index(self):
        with pytest.raises(ValueError):
            q.SpinConfiguration(8, 3)


class TestEnergy:
    def test_ising_ground_state(self):
        assert q.energy(q.IsingChain(4), 0) == -4.0

    def test_ising_single_flip(self):
        # one flipped spin breaks two bonds: first excited level -N+4
        x = q.SpinConfiguration.from_spins([1, 1, 1, -1])
        assert q.energy(q.IsingChain(4), x) == 0.0

    def test_ising_rejects_small_rings(self):
        with pytest.raises(ValueError):
            q.IsingChain(2)

    def test_sk_hand_sum(self):
        sk = q.SKModel(couplings=np.array([[0.0, 0.5], [0.5, 0.0]]),
                       fields=np.array([0.1, -0.2]))
        # -J12 + h1 + h2
        assert q.energy(sk, 0) == pytest.approx(-0.6, abs=1e-15)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            q.energy(q.IsingChain(4), q.SpinConfiguration(0, 5))

    def test_ising_level_structure(self):
        for n in (4, 6, 8):
            table = q.energy_table(q.IsingChain(n))
            ks = (table + n) / 4.0
            assert np.all(ks == np.round(ks))
            assert ks.min() == 0 and ks.max() == n // 2

    def test_ising_n4_multiset(self):
        table = q.energy_table(q.IsingChain(4))
        values, counts = np.unique(table, return_counts=True)
        assert values.tolist() == [-4.0, 0.0, 4.0]
        assert counts.tolist() == [2, 12, 2]


class TestEnergyTable:
    def test_matches_per_index_oracle_sk(self):
        sk = q.sample_sk(6, (3, 1))
        table = q.energy_table(sk)
        for index in range(64):
            assert table[index] == pytest.approx(q.energy(sk, index), abs=1e-12)

    def test_matches_per_index_oracle_pspin(self):
        ps = q.sample_pspin(6, 3, (4, 2))
        table = q.energy_table(ps)
        for index in range(0, 64, 5):
            assert table[index] == pytest.approx(q.energy(ps, index), abs=1e-12)

    def test_pspin_single_coupling_parity(self):
        # p=3, N=3: exactly one tuple; energy is -J * product of the three spins
        ps = q.PSpinModel(n_spins=3, order=3, tuples=[[0, 1, 2]], couplings=[1.0])
        table = q.energy_table(ps)
        for index in range(8):
            prod = np.prod(q.SpinConfiguration(index, 3).spins)
            assert table[index] == pytest.approx(-prod)

    def test_dimension_guard(self):
        with pytest.raises(q.DimensionLimitError):
            q.energy_table(q.IsingChain(15))

    def test_flip_symmetry(self):
        n = 6
        full = (1 << n) - 1
        sk = q.sample_sk(n, (9, 0), field_halfwidth=0.0)
        table = q.energy_table(sk)
        assert np.allclose(table, table[np.arange(1 << n) ^ full])
        ising = q.energy_table(q.IsingChain(n))
        assert np.allclose(ising, ising[np.arange(1 << n) ^ full])
        # odd interaction order flips sign instead
        ps = q.sample_pspin(n, 3, (9, 0))
        pt = q.energy_table(ps)
        assert np.allclose(pt, -pt[np.arange(1 << n) ^ full])


class TestBoltzmann:
    def test_infinite_temperature_is_uniform(self):
        table = q.boltzmann(np.array([3.0, -1.0, 0.5, 2.0]), 0.0)
        assert np.allclose(table.pi, 0.25)
        assert table.pi_min == pytest.approx(0.25)

    def test_two_level_closed_form(self):
        table = q.boltzmann(np.array([-1.0, 1.0]), 1.0)
        z = math.e + 1.0 / math.e
        assert table.pi[0] == pytest.approx(math.e / z, rel=1e-14)
        assert table.pi[1] == pytest.approx(1.0 / (math.e * z), rel=1e-14)

    def test_low_temperature_concentrates_on_ground_states(self):
        energies = q.energy_table(q.IsingChain(4))
        table = q.boltzmann(energies, 5.0)
        assert table.pi[energies == -4.0].sum() > 0.999

    @given(st.integers(min_value=0, max_value=10**6))
    @settings(max_examples=30, deadline=None)
    def test_normalization(self, raw_seed):
        rng = np.random.default_rng(raw_seed)
        energies = rng.normal(size=32) * 5
        table = q.boltzmann(energies, float(rng.uniform(0, 10)))
        assert abs(table.pi.sum() - 1.0) <= 1e-12

    def test_free_energy_reaches_ground_state(self):
        # generic SK instances have a unique ground state, so F_50 ≈ E_min
        energies = q.energy_table(q.sample_sk(8, (2, 5)))
        table = q.boltzmann(energies, 50.0)
        assert table.f_beta == pytest.approx(float(energies.min()), abs=1e-6)

    def test_free_energy_with_ground_degeneracy(self):
        # F_β → E_min − ln(g)/β when the ground level holds g states
        energies = q.energy_table(q.IsingChain(6))
        table = q.boltzmann(energies, 50.0)
        g = int(np.sum(energies == energies.min()))
        assert g == 2
        assert table.f_beta == pytest.approx(energies.min() - math.log(g) / 50.0, abs=1e-6)

    def test_proportionality(self):
        energies = np.array([0.0, 1.0, 2.5])
        table = q.boltzmann(energies, 1.3)
        ratio = table.pi / np.exp(-1.3 * energies)
        assert np.allclose(ratio, ratio[0], rtol=1e-14)

    def test_negative_beta_rejected(self):
        with pytest.raises(ValueError):
            q.boltzmann(np.zeros(2), -1.0)


class TestDisorderSampling:
    def test_sk_determinism(self):
        a = q.sample_sk(8, q.DisorderSeed(123, 7))
        b = q.sample_sk(8, q.DisorderSeed(123, 7))
        assert np.array_equal(a.couplings, b.couplings)
        assert np.array_equal(a.fields, b.fields)

    def test_sk_instances_differ(self):
        a = q.sample_sk(8, q.DisorderSeed(123, 0))
        b = q.sample_sk(8, q.DisorderSeed(123, 1))
        assert not np.array_equal(a.couplings, b.couplings)

    def test_sk_coupling_spread(self):
        # sample std over an ensemble within 3 standard errors of 1/sqrt(8)
        n, instances = 8, 400
        values = np.concatenate([
            q.sample_sk(n, q.DisorderSeed(77, i)).couplings[np.triu_indices(n, 1)]
            for i in range(instances)
        ])
        target = 1.0 / math.sqrt(n)
        se = target / math.sqrt(2 * (len(values) - 1))
        assert abs(values.std(ddof=1) - target) < 3 * se

    def test_sk_zero_halfwidth_gives_symmetric_instance(self):
        model = q.sample_sk(6, (5, 0), field_halfwidth=0.0)
        assert np.all(model.fields == 0.0)

    def test_pspin_tuple_count(self):
        model = q.sample_pspin(3, 3, (1, 0))
        assert model.tuples.shape == (1, 3)
        assert model.couplings.shape == (1,)

    def test_pspin_coupling_variance(self):
        # var = p!/(2 N^{p-1}) = 0.03 for p=3, N=10
        values = np.concatenate([
            q.sample_pspin(10, 3, q.DisorderSeed(99, i)).couplings for i in range(40)
        ])
        target = math.factorial(3) / (2 * 10**2)
        se = target * math.sqrt(2.0 / (len(values) - 1))
        assert abs(values.var(ddof=1) - target) < 3 * se

    def test_pspin_p2_matches_sk_convention(self):
        assert math.factorial(2) / (2 * 9**1) == pytest.approx(1.0 / 9)

    def test_pspin_order_validation(self):
        with pytest.raises(ValueError):
            q.sample_pspin(4, 5, (1, 0))


class TestSerialization:
    def test_sk_json_roundtrip(self):
        model = q.sample_sk(5, q.DisorderSeed(42, 3))
        data = json.loads(json.dumps(q.model_to_json(model)))
        back = q.model_from_json(data)
        assert np.array_equal(back.couplings, model.couplings)
        assert np.array_equal(back.fields, model.fields)
        assert back.seed == model.seed

    def test_pspin_json_roundtrip(self):
        model = q.sample_pspin(5, 3, (8, 1), field_halfwidth=0.1)
        back = q.model_from_json(q.model_to_json(model))
        assert np.array_equal(back.tuples, model.tuples)
        assert np.array_equal(back.couplings, model.couplings)
        assert np.array_equal(back.fields, model.fields)

    def test_json_shape(self):
        model = q.sample_sk(3, q.DisorderSeed(1, 2))
        data = q.model_to_json(model)
        assert data["model"] == "sk" and data["N"] == 3
        assert data["seed"] == 1 and data["index"] == 2
        assert len(data["J"]) == 3 and len(data["h"]) == 3

    def test_energy_table_csv(self):
        from qmcmc.models import energy_table_to_csv

        buf = stdio.StringIO()
        energy_table_to_csv(q.energy_table(q.IsingChain(3)), buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "index,energy"
        assert len(lines) == 9
        assert lines[1] == "0,-3.0"
