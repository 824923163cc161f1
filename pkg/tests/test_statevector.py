import math

import numpy as np
import pytest

from homoqaoa import (
    ClassSpec,
    Clause,
    NumericalError,
    ProblemInstance,
    Schedule,
    approximation_ratio,
    expectation,
    generate_instance,
    qaoa_state,
    squared_overlap,
)
from homoqaoa.problems import cost_vector
from homoqaoa.statevector import apply_mixer_layer, uniform_state

from conftest import random_schedule

K2 = ProblemInstance(
    spec=ClassSpec(kind="maxcut-er", n=2, p_e=1.0), n=2, clauses=(Clause((0, 1)),)
)


class TestQaoaState:
    def test_zero_angles_keep_uniform(self, er8_spec):
        inst = generate_instance(er8_spec, 0)
        state = qaoa_state(inst, Schedule(gammas=[0.0], betas=[0.0]))
        assert np.allclose(state.amplitudes, 2.0**-4.0, atol=1e-14)

    def test_single_qubit_full_rotation(self):
        inst = generate_instance(ClassSpec(kind="hamming-weight", n=1), 0)
        state = qaoa_state(inst, Schedule(gammas=[0.7], betas=[math.pi / 2]))
        # beta = pi/2 swaps the two amplitudes up to the phases
        # -i e^{-i 0.7 c(x)} applied along the way
        expected = np.array(
            [-1j * np.exp(-0.7j) / math.sqrt(2), -1j / math.sqrt(2)]
        )
        assert np.allclose(state.amplitudes, expected, atol=1e-12)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_norm_preserved(self, er8_spec, seed):
        inst = generate_instance(er8_spec, seed)
        sched = random_schedule(np.random.default_rng(seed), 5)
        state = qaoa_state(inst, sched)
        assert np.vdot(state.amplitudes, state.amplitudes).real == pytest.approx(
            1.0, abs=1e-10
        )

    def test_mixer_half_turn_flips_basis_states(self):
        n = 6
        rng = np.random.default_rng(0)
        for _ in range(4):
            x = int(rng.integers(0, 1 << n))
            psi = np.zeros(1 << n, dtype=complex)
            psi[x] = 1.0
            apply_mixer_layer(psi, math.pi / 2, n)
            flipped = x ^ ((1 << n) - 1)
            assert abs(psi[flipped] - (-1j) ** n) < 1e-10
            mask = np.ones(1 << n, bool)
            mask[flipped] = False
            assert np.abs(psi[mask]).max() < 1e-10

    def test_hamming_cost_gives_homogeneous_amplitudes(self):
        spec = ClassSpec(kind="hamming-weight", n=8)
        inst = generate_instance(spec, 0)
        sched = random_schedule(np.random.default_rng(9), 4)
        amps = qaoa_state(inst, sched).amplitudes
        weights = np.bitwise_count(np.arange(256, dtype=np.uint64))
        for w in range(9):
            group = amps[weights == w]
            assert np.abs(group - group[0]).max() < 1e-10

    def test_cost_vector_reuse_matches(self, er8_spec):
        inst = generate_instance(er8_spec, 3)
        costs = cost_vector(inst)
        sched = random_schedule(np.random.default_rng(4), 3)
        a = qaoa_state(inst, sched).amplitudes
        b = qaoa_state(inst, sched, costs=costs).amplitudes
        assert np.array_equal(a, b)


class TestExpectation:
    def test_uniform_state_half_the_edges(self, er8_spec):
        inst = generate_instance(er8_spec, 0)
        state = qaoa_state(inst, Schedule(gammas=[0.0], betas=[0.0]))
        assert expectation(inst, state) == pytest.approx(inst.m / 2, abs=1e-10)

    def test_basis_state_returns_its_cost(self, er8_spec):
        from homoqaoa.statevector import Statevector

        inst = generate_instance(er8_spec, 0)
        costs = cost_vector(inst)
        x = 173
        psi = np.zeros(256, dtype=complex)
        psi[x] = 1.0
        assert expectation(inst, Statevector(psi, 8)) == pytest.approx(float(costs[x]))

    def test_global_phase_invariance(self, er8_spec):
        inst = generate_instance(er8_spec, 2)
        sched = random_schedule(np.random.default_rng(8), 2)
        state = qaoa_state(inst, sched)
        from homoqaoa.statevector import Statevector

        rotated = Statevector(np.exp(0.841j) * state.amplitudes, 8)
        assert expectation(inst, rotated) == pytest.approx(
            expectation(inst, state), rel=1e-12
        )

    def test_range(self, er8_spec):
        inst = generate_instance(er8_spec, 5)
        for seed in range(3):
            sched = random_schedule(np.random.default_rng(seed), 3)
            value = expectation(inst, qaoa_state(inst, sched))
            assert 0.0 <= value <= inst.m


class TestSquaredOverlap:
    def test_self(self):
        v = np.array([1.0, 2.0j, -0.5])
        assert squared_overlap(v, v) == pytest.approx(1.0)

    def test_orthogonal(self):
        assert squared_overlap([1.0, 0.0], [0.0, 1.0]) == 0.0

    def test_scale_invariance(self):
        v = np.array([0.3, -0.7j, 1.1])
        assert squared_overlap(v, 3.0 * v) == pytest.approx(1.0)

    def test_zero_vector_rejected(self):
        with pytest.raises(NumericalError):
            squared_overlap([0.0, 0.0], [1.0, 0.0])


class TestApproximationRatio:
    def test_k2_optimal_angles_reach_one(self):
        # oracle: a dense scan brackets the peak; the exact family point
        # (gamma, beta) = (pi/2, pi/8) cuts the edge with certainty
        best = 0.0
        for g in np.linspace(0, 2 * math.pi, 101):
            for b in np.linspace(0, math.pi, 51):
                r = approximation_ratio(K2, Schedule(gammas=[g], betas=[b]))
                best = max(best, r)
        assert best > 0.995
        exact = approximation_ratio(
            K2, Schedule(gammas=[math.pi / 2], betas=[math.pi / 8])
        )
        assert exact == pytest.approx(1.0, abs=1e-10)

    def test_zero_angles_give_half_m_over_optimum(self, er8_spec):
        inst = generate_instance(er8_spec, 0)
        costs = cost_vector(inst)
        r = approximation_ratio(inst, Schedule(gammas=[0.0], betas=[0.0]))
        assert r == pytest.approx(inst.m / 2 / costs.max(), abs=1e-10)

    def test_conflict_class_reports_satisfied_fraction(self):
        spec = ClassSpec(kind="rand-k-sat", n=8, m=12, k=3)
        inst = generate_instance(spec, 1)
        costs = cost_vector(inst)
        r = approximation_ratio(inst, Schedule(gammas=[0.0], betas=[0.0]))
        expected = (inst.m - costs.mean()) / (inst.m - costs.min())
        assert r == pytest.approx(expected, rel=1e-10)
        assert 0.0 < r <= 1.0

    def test_edgeless_graph_rejected(self):
        # a draw with no edges has c_opt = 0 and no meaningful ratio
        edgeless = ProblemInstance(
            spec=ClassSpec(kind="maxcut-er", n=2, p_e=1.0), n=2, clauses=()
        )
        with pytest.raises(NumericalError):
            approximation_ratio(edgeless, Schedule(gammas=[0.1], betas=[0.1]))
