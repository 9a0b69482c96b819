"""Kernel unit tests: preparations, gates, measurements, comparisons."""

import numpy as np
import pytest

from sqpc import kernel
from sqpc.kernel import (
    MINUS,
    PLUS,
    BellState,
    Register,
    amplitudes_close,
    apply_cnot,
    apply_hadamard,
    bell_probabilities,
    measure_bell,
    measure_x,
    measure_z,
    prepare_bell,
    prepare_x,
    prepare_z,
    tensor,
)
from conftest import (
    BELL_VECTORS,
    X_PLUS,
    oracle_projector_probability,
    oracle_z_probability,
    random_state,
)

S = kernel.SQRT_HALF
TOL = 1e-9

class TestPreparations:
    def test_phi_plus_amplitudes(self):
        assert np.allclose(prepare_bell(BellState.PHI_PLUS), [S, 0, 0, S], atol=TOL)

    def test_psi_minus_amplitudes(self):
        assert np.allclose(prepare_bell(BellState.PSI_MINUS), [0, S, -S, 0], atol=TOL)

    @pytest.mark.parametrize("variant", list(BellState))
    def test_bell_measure_recovers_preparation(self, variant, rng):
        outcome, post = measure_bell(prepare_bell(variant), 0, 1, rng)
        assert outcome is variant
        assert amplitudes_close(post, prepare_bell(variant), TOL)

    def test_prepare_z_one(self):
        assert np.allclose(prepare_z(1), [0, 1], atol=TOL)

    def test_prepare_x_minus(self):
        assert np.allclose(prepare_x(MINUS), [S, -S], atol=TOL)

    def test_z_read_of_plus_is_unbiased(self, rng):
        ones = sum(measure_z(prepare_x(PLUS), 0, rng)[0] for _ in range(4000))
        assert abs(ones / 4000 - 0.5) < 4 * np.sqrt(0.25 / 4000)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            prepare_z(2)
        with pytest.raises(ValueError):
            prepare_x(5)

class TestTensor:
    def test_zero_one(self):
        assert np.allclose(tensor(prepare_z(0), prepare_z(1)), [0, 1, 0, 0], atol=TOL)

    def test_bell_with_fresh_zero(self):
        got = tensor(prepare_bell(BellState.PHI_PLUS), prepare_z(0))
        expected = np.zeros(8, dtype=complex)
        expected[0b000] = S
        expected[0b110] = S
        assert np.allclose(got, expected, atol=TOL)

    def test_norm_multiplicative(self, rng):
        for _ in range(20):
            a = random_state(2, rng)
            b = random_state(1, rng)
            assert abs(np.linalg.norm(tensor(a, b)) - 1.0) < TOL

    def test_register_overflow(self, rng):
        with pytest.raises(ValueError):
            tensor(random_state(5, rng), random_state(4, rng))

class TestCnot:
    def test_flips_target_when_control_set(self):
        got = apply_cnot(np.array([0, 0, 1, 0], dtype=complex), 0, 1)
        assert np.allclose(got, [0, 0, 0, 1], atol=TOL)

    def test_tap_on_pair_half_gives_ghz(self):
        # (A, E, B) register: phi+ on (A, B), fresh |0> ancilla at E.
        sv = tensor(prepare_bell(BellState.PHI_PLUS), prepare_z(0))
        sv = np.moveaxis(sv.reshape(2, 2, 2), (0, 1, 2), (0, 2, 1)).reshape(-1)  # reorder to A,E,B
        got = apply_cnot(sv, 0, 1)
        expected = np.zeros(8, dtype=complex)
        expected[0b000] = S
        expected[0b111] = S
        assert np.allclose(got, expected, atol=TOL)

    def test_self_inverse(self, rng):
        for _ in range(20):
            sv = random_state(3, rng)
            c, t = rng.choice(3, size=2, replace=False)
            twice = apply_cnot(apply_cnot(sv, c, t), c, t)
            assert np.allclose(twice, sv, atol=TOL)

    def test_rejects_aliased_wires(self):
        with pytest.raises(ValueError):
            apply_cnot(prepare_bell(BellState.PHI_PLUS), 1, 1)
        with pytest.raises(ValueError):
            apply_cnot(prepare_bell(BellState.PHI_PLUS), 0, 2)

    def test_matches_embedded_matrix(self, rng):
        from conftest import embed_operator

        cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
        for _ in range(10):
            sv = random_state(4, rng)
            c, t = (int(x) for x in rng.choice(4, size=2, replace=False))
            full = embed_operator(cnot, [c, t], 4)
            assert np.allclose(apply_cnot(sv, c, t), full @ sv, atol=TOL)

class TestMeasureZ:
    def test_eigenstate_is_certain(self, rng):
        for _ in range(10):
            bit, post = measure_z(prepare_z(1), 0, rng)
            assert bit == 1
            assert np.allclose(post, prepare_z(1), atol=TOL)

    def test_idempotent(self, rng):
        for _ in range(50):
            sv = random_state(3, rng)
            q = int(rng.integers(3))
            bit1, sv = measure_z(sv, q, rng)
            bit2, sv = measure_z(sv, q, rng)
            assert bit1 == bit2

    def test_resent_zero_indicator_is_uniform(self, rng):
        # The three-qubit state left by a second probe C-NOT after a |0>
        # resend: probe reads 1 exactly half the time.
        sv = np.zeros(8, dtype=complex)
        sv[0b000] = S
        sv[0b011] = S
        ones = sum(measure_z(sv, 1, rng)[0] for _ in range(4000))
        assert abs(ones / 4000 - 0.5) < 4 * np.sqrt(0.25 / 4000)

    def test_measuring_shared_one_leaves_pair_entangled(self, rng):
        # 1/sqrt2(|1 1 0> + |1 0 1>): qubit 0 reads 1 surely, others untouched.
        sv = np.zeros(8, dtype=complex)
        sv[0b110] = S
        sv[0b101] = S
        bit, post = measure_z(sv, 0, rng)
        assert bit == 1
        assert np.allclose(post, sv, atol=TOL)

class TestMeasureX:
    def test_plus_is_certain(self, rng):
        sign, post = measure_x(prepare_x(PLUS), 0, rng)
        assert sign == PLUS
        assert amplitudes_close(post, prepare_x(PLUS), TOL)

    def test_zero_reads_uniform(self, rng):
        plus = sum(measure_x(prepare_z(0), 0, rng)[0] == PLUS for _ in range(4000))
        assert abs(plus / 4000 - 0.5) < 4 * np.sqrt(0.25 / 4000)

    def test_z_then_x_on_plus_is_uniform(self, rng):
        # Enumerated oracle: both Z branches overlap |+-> with probability 1/2.
        for branch in (0, 1):
            assert oracle_projector_probability(prepare_z(branch), X_PLUS, [0]) == pytest.approx(0.5)
        hits = 0
        for _ in range(4000):
            _, collapsed = measure_z(prepare_x(PLUS), 0, rng)
            sign, _ = measure_x(collapsed, 0, rng)
            hits += sign == PLUS
        assert abs(hits / 4000 - 0.5) < 4 * np.sqrt(0.25 / 4000)

class TestMeasureBell:
    def test_prepared_state_is_certain(self, rng):
        outcome, _ = measure_bell(prepare_bell(BellState.PHI_MINUS), 0, 1, rng)
        assert outcome is BellState.PHI_MINUS

    def test_restored_pair_with_idle_ancilla(self, rng):
        # Pair back in phi+ with the probe ancilla in |0>: outcome certain
        # and the ancilla untouched.
        sv = tensor(prepare_bell(BellState.PHI_PLUS), prepare_z(0))
        outcome, post = measure_bell(sv, 0, 1, rng)
        assert outcome is BellState.PHI_PLUS
        assert amplitudes_close(post, sv, TOL)

    def test_ghz_marginal_pair(self, rng):
        sv = np.zeros(8, dtype=complex)
        sv[0b000] = S
        sv[0b111] = S
        # Oracle: embedded Bell projectors on qubits (0, 2).
        expected = {
            name: oracle_projector_probability(sv, vec, [0, 2]) for name, vec in BELL_VECTORS.items()
        }
        assert expected["phi+"] == pytest.approx(0.5, abs=TOL)
        assert expected["phi-"] == pytest.approx(0.5, abs=TOL)
        assert expected["psi+"] == pytest.approx(0.0, abs=TOL)
        assert expected["psi-"] == pytest.approx(0.0, abs=TOL)
        counts = {v: 0 for v in BellState}
        for _ in range(2000):
            outcome, _ = measure_bell(sv, 0, 2, rng)
            counts[outcome] += 1
        assert counts[BellState.PSI_PLUS] == 0
        assert counts[BellState.PSI_MINUS] == 0
        assert abs(counts[BellState.PHI_PLUS] / 2000 - 0.5) < 4 * np.sqrt(0.25 / 2000)

    def test_probabilities_match_embedded_projectors(self, rng):
        for _ in range(10):
            sv = random_state(3, rng)
            q1, q2 = (int(x) for x in rng.choice(3, size=2, replace=False))
            got = bell_probabilities(sv, q1, q2)
            names = ["phi+", "phi-", "psi+", "psi-"]
            for value, name in enumerate(names):
                want = oracle_projector_probability(sv, BELL_VECTORS[name], [q1, q2])
                assert got[value] == pytest.approx(want, abs=1e-9)

    def test_completeness_on_random_states(self, rng):
        for _ in range(20):
            sv = random_state(4, rng)
            q1, q2 = (int(x) for x in rng.choice(4, size=2, replace=False))
            assert bell_probabilities(sv, q1, q2).sum() == pytest.approx(1.0, abs=TOL)

    def test_rejects_alias(self, rng):
        with pytest.raises(ValueError):
            measure_bell(prepare_bell(BellState.PHI_PLUS), 0, 0, rng)

class TestAmplitudesClose:
    def test_identical(self, rng):
        sv = random_state(2, rng)
        assert amplitudes_close(sv, sv, TOL)

    def test_global_phase_forgiven(self):
        sv = prepare_bell(BellState.PHI_PLUS)
        assert amplitudes_close(sv, -sv, TOL)
        assert amplitudes_close(sv, np.exp(0.7j) * sv, TOL)

    def test_orthogonal_states_differ(self):
        assert not amplitudes_close(
            prepare_bell(BellState.PHI_PLUS), prepare_bell(BellState.PSI_PLUS), TOL
        )

    def test_relative_phase_distinguishes(self):
        assert not amplitudes_close(
            prepare_bell(BellState.PHI_PLUS), prepare_bell(BellState.PHI_MINUS), TOL
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            amplitudes_close(prepare_z(0), prepare_bell(BellState.PHI_PLUS), TOL)

class TestInvariants:
    def test_norm_preserved_by_random_op_sequences(self, rng):
        for _ in range(100):
            sv = random_state(int(rng.integers(1, 3)), rng)
            for _ in range(20):
                n = sv.shape[0].bit_length() - 1
                op = rng.integers(5)
                if op == 0 and n < 4:
                    sv = tensor(sv, prepare_z(int(rng.integers(2))))
                elif op == 1 and n >= 2:
                    c, t = (int(x) for x in rng.choice(n, size=2, replace=False))
                    sv = apply_cnot(sv, c, t)
                elif op == 2:
                    sv = apply_hadamard(sv, int(rng.integers(n)))
                elif op == 3:
                    _, sv = measure_z(sv, int(rng.integers(n)), rng)
                else:
                    _, sv = measure_x(sv, int(rng.integers(n)), rng)
                assert abs(np.linalg.norm(sv) - 1.0) <= 1e-9

    def test_unitaries_preserve_inner_products(self, rng):
        for _ in range(50):
            a = random_state(3, rng)
            b = random_state(3, rng)
            before = np.vdot(a, b)
            c, t = (int(x) for x in rng.choice(3, size=2, replace=False))
            assert np.vdot(apply_cnot(a, c, t), apply_cnot(b, c, t)) == pytest.approx(before, abs=1e-9)
            q = int(rng.integers(3))
            assert np.vdot(apply_hadamard(a, q), apply_hadamard(b, q)) == pytest.approx(before, abs=1e-9)

    def test_z_frequencies_match_enumeration(self, rng):
        for _ in range(5):
            sv = random_state(3, rng)
            q = int(rng.integers(3))
            p1 = oracle_z_probability(sv, q, 1)
            samples = 20_000
            ones = sum(measure_z(sv, q, rng)[0] for _ in range(samples))
            sigma = np.sqrt(max(p1 * (1 - p1), 1e-12) / samples)
            assert abs(ones / samples - p1) <= 4 * sigma + 1e-9

class TestRegister:
    def test_adjoin_returns_new_wire(self):
        reg = Register(prepare_bell(BellState.PHI_PLUS))
        wire = reg.adjoin(prepare_z(1))
        assert wire == 2
        assert reg.n == 3

    def test_cap_enforced(self, rng):
        reg = Register(random_state(8, rng))
        with pytest.raises(ValueError):
            reg.adjoin(prepare_z(0))

    def test_measurements_mutate_in_place(self, rng):
        reg = Register(prepare_bell(BellState.PHI_PLUS))
        bit_a = reg.measure_z(0, rng)
        bit_b = reg.measure_z(1, rng)
        assert bit_a == bit_b  # phi+ halves agree in Z

    def test_same_seed_same_stream(self):
        def drive(seed):
            rng = np.random.default_rng(seed)
            reg = Register(prepare_bell(BellState.PHI_PLUS))
            reg.adjoin(prepare_x(PLUS))
            return [reg.measure_z(0, rng), reg.measure_z(2, rng), reg.measure_x(1, rng)]

        assert drive(7) == drive(7)
