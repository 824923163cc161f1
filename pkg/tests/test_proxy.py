import math

import numpy as np
import pytest
from scipy.linalg import expm

from homoqaoa import (
    ClassSpec,
    CostUnreachableError,
    HomogState,
    LinearRamp,
    Schedule,
    SpecError,
    evolve,
    evolve_step,
    evolve_trajectory,
    expected_cost,
    generate_instance,
    initial_state,
    mixer_element,
    precompute_all,
    proxy_pseudostate,
    pseudo_norm,
    qaoa_state,
    squared_overlap,
    sum_of_paths_state,
)
from homoqaoa.proxy import evolve_many, scatter_to_bitstrings

from conftest import random_schedule


class TestSchedule:
    def test_lengths_must_match(self):
        with pytest.raises(SpecError):
            Schedule(gammas=[0.1, 0.2], betas=[0.3])

    def test_angles_must_be_finite(self):
        with pytest.raises(SpecError):
            Schedule(gammas=[np.nan], betas=[0.1])
        with pytest.raises(SpecError):
            LinearRamp(0.1, np.inf, 0.2, 0.3)

    def test_depth(self):
        assert Schedule(gammas=[0.1, 0.2, 0.3], betas=[0.3, 0.2, 0.1]).p == 3


class TestMixerElement:
    def test_identity_at_zero(self):
        for n in (1, 5, 40):
            assert mixer_element(n, 0, 0.0) == 1.0

    def test_full_flip(self):
        assert mixer_element(1, 1, math.pi / 2) == pytest.approx(-1j)

    def test_single_qubit_matrix_exponential_oracle(self):
        # oracle: exp(-i beta X) entries for a single qubit
        X = np.array([[0.0, 1.0], [1.0, 0.0]])
        for beta in (0.25, math.pi / 4, 1.3, 2.9):
            U = expm(-1j * beta * X)
            assert mixer_element(1, 0, beta) == pytest.approx(U[0, 0])
            assert mixer_element(1, 1, beta) == pytest.approx(U[0, 1])

    def test_quadrant_signs(self):
        # beta in the second quadrant: cosine negative, sine positive
        beta = 2.0
        for n, d in ((3, 0), (3, 1), (3, 2), (3, 3), (6, 4)):
            direct = math.cos(beta) ** (n - d) * (-1j * math.sin(beta)) ** d
            assert mixer_element(n, d, beta) == pytest.approx(direct)

    def test_large_n_no_underflow_to_junk(self):
        val = mixer_element(400, 200, 0.3)
        assert np.isfinite(val.real) and np.isfinite(val.imag)
        # tiny but structured: log magnitude matches the direct formula
        expected_log = 200 * math.log(abs(math.cos(0.3))) + 200 * math.log(
            abs(math.sin(0.3))
        )
        assert math.log(abs(val)) == pytest.approx(expected_log)

    def test_out_of_range_distance(self):
        with pytest.raises(SpecError):
            mixer_element(3, 4, 0.1)


class TestInitialState:
    def test_uniform_amplitude(self, er10_table):
        state = initial_state(er10_table)
        assert np.allclose(state.q, 2.0 ** (-5.0), atol=0)
        assert state.layer == 0

    def test_pseudo_norm_is_one(self, er10_table):
        assert pseudo_norm(initial_state(er10_table), er10_table) == pytest.approx(
            1.0, abs=1e-12
        )

    def test_unreachable_costs_start_at_zero(self):
        spec = ClassSpec(kind="maxcut-er", n=10, p_e=1 / 3, margin=2)
        table = precompute_all(spec)
        state = initial_state(table)
        assert np.all(state.q[16:] == 0.0)
        assert pseudo_norm(state, table) == pytest.approx(1.0, abs=1e-12)


class TestEvolveStep:
    def test_zero_angles_do_nothing(self, er10_table):
        s0 = initial_state(er10_table)
        s1 = evolve_step(s0, er10_table, 0.0, 0.0)
        assert np.allclose(s1.q, s0.q, atol=1e-14)
        assert s1.layer == 1

    def test_gamma_zero_is_global_phase(self, er10_table):
        # row sums collapse the contraction to (cos b - i sin b)^n
        s0 = initial_state(er10_table)
        beta = 0.73
        s1 = evolve_step(s0, er10_table, 0.0, beta)
        phase = np.exp(-1j * 10 * beta)
        assert np.allclose(s1.q, phase * s0.q, atol=1e-12)
        assert np.allclose(np.abs(s1.q), np.abs(s0.q), atol=1e-12)

    def test_linear_in_state(self, er10_table):
        rng = np.random.default_rng(3)
        qa = rng.normal(size=16) + 1j * rng.normal(size=16)
        qb = rng.normal(size=16) + 1j * rng.normal(size=16)
        mk = lambda q: HomogState(q=q, layer=0, table_key=er10_table.key)
        out = lambda q: evolve_step(mk(q), er10_table, 0.8, 0.4).q
        combined = out(2.0 * qa + 3j * qb)
        assert np.allclose(combined, 2.0 * out(qa) + 3j * out(qb), rtol=1e-10)

    def test_table_mismatch_rejected(self, er10_table, hw8_table):
        with pytest.raises(SpecError):
            evolve_step(initial_state(er10_table), hw8_table, 0.1, 0.1)


class TestEvolve:
    def test_matches_stepwise(self, er10_table):
        sched = random_schedule(np.random.default_rng(0), 4)
        final = evolve(er10_table, sched)
        stepped = evolve_trajectory(er10_table, sched)[-1]
        assert np.allclose(final.q, stepped.q, rtol=1e-12)
        assert final.layer == 4

    def test_output_width(self, er10_table):
        sched = Schedule(gammas=[0.3], betas=[0.2])
        assert evolve(er10_table, sched).q.shape == (16,)

    def test_batch_matches_loop(self, er8_table):
        rng = np.random.default_rng(5)
        gammas = rng.uniform(0, 1.0, (6, 3))
        betas = rng.uniform(0, 1.0, (6, 3))
        batch = evolve_many(er8_table, gammas, betas)
        for row in range(6):
            single = evolve(er8_table, Schedule(gammas=gammas[row], betas=betas[row]))
            assert np.allclose(batch[row], single.q, rtol=1e-12)

    def test_unreachable_costs_stay_zero(self):
        spec = ClassSpec(kind="maxcut-er", n=8, p_e=0.5, margin=2)
        table = precompute_all(spec)
        sched = random_schedule(np.random.default_rng(2), 3)
        final = evolve(table, sched)
        assert np.all(final.q[~table.reachable] == 0.0)


class TestExpectedCost:
    def test_layer0_binomial_mean(self, er10_table):
        # oracle: sum_c C(m,c) 2^-m c = m/2
        mean = sum(
            math.comb(15, c) * 2.0**-15 * c for c in range(16)
        )
        assert mean == pytest.approx(7.5)
        state = initial_state(er10_table)
        assert expected_cost(state, er10_table) == pytest.approx(7.5, abs=1e-10)

    def test_gamma_zero_schedules_keep_the_mean(self, er10_table):
        sched = Schedule(gammas=[0.0, 0.0, 0.0], betas=[0.9, 0.1, 1.4])
        final = evolve(er10_table, sched)
        assert expected_cost(final, er10_table) == pytest.approx(7.5, abs=1e-9)

    def test_single_cost_support_normalized(self, er10_table):
        q = np.zeros(16, dtype=complex)
        q[9] = 0.123
        state = HomogState(q=q, layer=1, table_key=er10_table.key)
        assert expected_cost(state, er10_table, normalize=True) == pytest.approx(9.0)

    def test_normalize_rejects_zero_norm(self, er10_table):
        state = HomogState(
            q=np.zeros(16, dtype=complex), layer=1, table_key=er10_table.key
        )
        from homoqaoa import NumericalError

        with pytest.raises(NumericalError):
            expected_cost(state, er10_table, normalize=True)


class TestProxyPseudostate:
    def test_layer_zero_uniform(self, er8_spec, er8_table):
        inst = generate_instance(er8_spec, 2)
        sched = Schedule(gammas=[0.0], betas=[0.0])
        psi = proxy_pseudostate(inst, er8_table, sched)
        assert np.allclose(psi, 2.0**-4.0, atol=1e-14)

    @pytest.mark.parametrize("p", [1, 3, 5])
    def test_hamming_class_is_exact(self, p):
        spec = ClassSpec(kind="hamming-weight", n=9)
        table = precompute_all(spec)
        inst = generate_instance(spec, 0)
        rng = np.random.default_rng(p)
        for _ in range(4):
            sched = random_schedule(rng, p)
            pseudo = proxy_pseudostate(inst, table, sched)
            exact = qaoa_state(inst, sched).amplitudes
            assert np.abs(pseudo - exact).max() < 1e-8

    def test_matches_scattered_costs(self, er8_spec, er8_table):
        from homoqaoa.problems import cost_vector

        inst = generate_instance(er8_spec, 2)
        sched = random_schedule(np.random.default_rng(1), 2)
        psi = proxy_pseudostate(inst, er8_table, sched)
        final = evolve(er8_table, sched)
        costs = cost_vector(inst)
        assert np.array_equal(psi, final.q[costs])

    def test_out_of_range_cost_raises(self, er8_table, er8_spec):
        # the complete graph on 8 nodes cuts up to 16 > c_max = 14
        from homoqaoa import Clause, ProblemInstance

        dense = ProblemInstance(
            spec=er8_spec,
            n=8,
            clauses=tuple(
                Clause((i, j)) for i in range(8) for j in range(i + 1, 8)
            ),
        )
        state = initial_state(er8_table)
        with pytest.raises(CostUnreachableError):
            scatter_to_bitstrings(state, er8_table, dense)

    def test_margin_mitigates_out_of_range(self, er8_spec):
        wide = precompute_all(ClassSpec(kind="maxcut-er", n=8, p_e=0.5, margin=3))
        inst = generate_instance(er8_spec, 1)
        sched = Schedule(gammas=[0.2], betas=[0.3])
        psi = proxy_pseudostate(inst, wide, sched)
        assert psi.shape == (256,)


class TestSumOfPaths:
    @pytest.mark.parametrize(
        "spec,seed",
        [
            (ClassSpec(kind="maxcut-er", n=7, p_e=0.5), 0),
            (ClassSpec(kind="rand-k-sat", n=6, m=12, k=3), 1),
            (ClassSpec(kind="maxe3lin2", n=6, m=10), 2),
        ],
    )
    def test_matches_gate_simulation(self, spec, seed):
        inst = generate_instance(spec, seed)
        sched = random_schedule(np.random.default_rng(seed), 3)
        sop = sum_of_paths_state(inst, sched)
        gate = qaoa_state(inst, sched).amplitudes
        assert squared_overlap(sop, gate) > 1 - 1e-10
        assert np.abs(sop - gate).max() < 1e-10

    def test_limit(self):
        spec = ClassSpec(kind="maxcut-er", n=14, p_e=0.2)
        inst = generate_instance(spec, 0)
        from homoqaoa import SizeLimitError

        with pytest.raises(SizeLimitError):
            sum_of_paths_state(inst, Schedule(gammas=[0.1], betas=[0.1]))
