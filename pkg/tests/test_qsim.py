import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from qmuse import qsim
from qmuse.qsim import (
    Circuit,
    CircuitOp,
    apply,
    apply_matrix,
    equal_up_to_phase,
    gate_h,
    gate_i,
    gate_rx,
    gate_ry,
    gate_rz,
    gate_u,
    gate_x,
    gate_z,
    mean_squared_amplitude,
    new_state,
    probabilities,
    tensor,
)

from reference_data import CX_TABLE, H2, TOFFOLI_TABLE

ALL_GATES = {
    "i": gate_i(), "h": gate_h(), "x": gate_x(), "z": gate_z(),
    "rz": gate_rz(0.7), "ry": gate_ry(-1.3), "rx": gate_rx(2.1), "u": gate_u(0.3, 1.1, -0.4),
}


def brute_force_unitary(gate, targets, controls, n):
    """Build the full matrix basis state by basis state, independent of qsim."""
    dim = 2**n
    u = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        bits = [(col >> q) & 1 for q in range(n)]
        if not all(bits[c] for c in controls):
            u[col, col] = 1
            continue
        j_in = sum(bits[t] << k for k, t in enumerate(targets))
        for j_out in range(2 ** len(targets)):
            out_bits = list(bits)
            for k, t in enumerate(targets):
                out_bits[t] = (j_out >> k) & 1
            row = sum(b << q for q, b in enumerate(out_bits))
            u[row, col] += gate[j_out, j_in]
    return u


class TestStates:
    def test_single_qubit_zero(self):
        np.testing.assert_array_equal(new_state(1, 0).amplitudes, [1, 0])

    def test_basis_index_is_little_endian(self):
        # |10>: q1 = 1, q0 = 0
        np.testing.assert_array_equal(new_state(2, 2).amplitudes, [0, 0, 1, 0])

    def test_three_qubits(self):
        amps = new_state(3, 0).amplitudes
        assert amps[0] == 1 and np.count_nonzero(amps) == 1

    @pytest.mark.parametrize("n,idx", [(1, 2), (2, -1), (3, 8)])
    def test_out_of_range(self, n, idx):
        with pytest.raises(ValueError):
            new_state(n, idx)

    def test_amplitudes_are_read_only(self):
        s = new_state(2)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_json_dump(self):
        s = Circuit(1).h(0).simulate()
        data = json.loads(s.to_json())
        np.testing.assert_allclose(data, [[2**-0.5, 0.0], [2**-0.5, 0.0]], atol=1e-15)


class TestGates:
    @pytest.mark.parametrize("name", ALL_GATES)
    def test_unitary(self, name):
        g = ALL_GATES[name]
        assert np.max(np.abs(g.conj().T @ g - np.eye(2))) < 1e-12

    @pytest.mark.parametrize("g", [gate_h(), gate_x(), gate_z()])
    def test_involutions(self, g):
        np.testing.assert_allclose(g @ g, np.eye(2), atol=1e-12)

    def test_x_flips_zero(self):
        s = apply(new_state(1), CircuitOp(gate_x(), (0,)))
        np.testing.assert_allclose(s.amplitudes, [0, 1])

    def test_h_balances_zero(self):
        s = apply(new_state(1), CircuitOp(gate_h(), (0,)))
        np.testing.assert_allclose(s.amplitudes, [2**-0.5, 2**-0.5], atol=1e-15)

    def test_rz_pi_is_z_up_to_phase(self):
        assert equal_up_to_phase(gate_rz(math.pi), gate_z())
        assert not np.allclose(gate_rz(math.pi), gate_z())

    def test_rx_pi_is_x_up_to_phase(self):
        assert equal_up_to_phase(gate_rx(math.pi), gate_x())

    def test_rx_is_u_with_fixed_phases(self):
        for theta in (0.1, 1.0, 2.5):
            np.testing.assert_allclose(
                gate_rx(theta), gate_u(theta, -math.pi / 2, math.pi / 2), atol=1e-15
            )

    @pytest.mark.parametrize("bad", [float("nan"), float("inf")])
    def test_non_finite_angle(self, bad):
        for f in (gate_rz, gate_ry, gate_rx):
            with pytest.raises(ValueError):
                f(bad)
        with pytest.raises(ValueError):
            gate_u(0.0, bad, 0.0)


class TestTensor:
    def test_h_tensor_h(self):
        np.testing.assert_allclose(tensor(gate_h(), gate_h()), H2, atol=1e-12)

    def test_identity(self):
        np.testing.assert_array_equal(tensor(gate_i(), gate_i()), np.eye(4))

    def test_kets(self):
        np.testing.assert_array_equal(tensor([1, 0], [0, 1]), [0, 1, 0, 0])


class TestApply:
    @pytest.mark.parametrize("inp,out", CX_TABLE.items())
    def test_cx_table(self, inp, out, backend):
        s = Circuit(2).cx(0, 1).simulate(new_state(2, int(inp, 2)))
        assert probabilities(s)[int(out, 2)] == 1.0

    @pytest.mark.parametrize("inp,out", TOFFOLI_TABLE.items())
    def test_toffoli_table(self, inp, out, backend):
        s = Circuit(3).ccx(0, 1, 2).simulate(new_state(3, int(inp, 2)))
        assert probabilities(s)[int(out, 2)] == 1.0

    def test_identity_op(self, backend):
        s = Circuit(2).h(0).cx(0, 1).simulate()
        t = apply(s, CircuitOp(gate_i(), (1,)))
        np.testing.assert_array_equal(s.amplitudes, t.amplitudes)

    def test_overlapping_indices(self):
        with pytest.raises(ValueError):
            CircuitOp(gate_x(), (1,), (1,))

    def test_index_out_of_range(self):
        with pytest.raises(ValueError):
            apply(new_state(2), CircuitOp(gate_x(), (2,)))
        with pytest.raises(ValueError):
            Circuit(2).cx(0, 3)

    def test_gate_shape_mismatch(self):
        with pytest.raises(ValueError):
            CircuitOp(np.eye(4), (0,))

    @given(
        n=st.integers(1, 5),
        data=st.data(),
    )
    @settings(max_examples=60, deadline=None)
    def test_matches_brute_force_unitary(self, n, data):
        qubits = data.draw(st.permutations(range(n)))
        k = data.draw(st.integers(1, min(2, n)))
        targets = tuple(qubits[:k])
        controls = tuple(q for q in qubits[k:] if data.draw(st.booleans()))
        seed = data.draw(st.integers(0, 2**32 - 1))
        rng = np.random.default_rng(seed)
        dim = 2**k
        gate = np.linalg.qr(rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim)))[0]
        psi = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
        psi /= np.linalg.norm(psi)
        state = qsim.StateVector(n, psi)
        out = apply(state, CircuitOp(gate, targets, controls))
        expected = brute_force_unitary(gate, targets, controls, n) @ psi
        np.testing.assert_allclose(out.amplitudes, expected, atol=1e-12)
        assert abs(out.norm() - 1) < 1e-12

    def test_full_unitary_matches_brute_force(self):
        op = CircuitOp(gate_ry(0.4), (2,), (0, 3))
        np.testing.assert_allclose(
            qsim.full_unitary(op, 4), brute_force_unitary(op.gate, (2,), (0, 3), 4), atol=1e-15
        )


class TestApplyMatrix:
    def test_two_qubit_oracle(self):
        s = apply_matrix(new_state(2), H2)
        out = apply_matrix(s, np.diag([1, -1, 1, 1]))
        np.testing.assert_allclose(out.amplitudes, np.array([1, -1, 1, 1]) / 2, atol=1e-12)

    def test_identity(self):
        s = Circuit(2).h(0).simulate()
        np.testing.assert_allclose(apply_matrix(s, np.eye(4)).amplitudes, s.amplitudes)

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            apply_matrix(new_state(1), np.array([[1, 1], [0, 1]]))

    def test_rejects_wrong_dimension(self):
        with pytest.raises(ValueError):
            apply_matrix(new_state(2), np.eye(2))


class TestProbabilities:
    def test_balanced(self):
        p = probabilities(Circuit(1).h(0).simulate())
        np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-12)

    def test_quarter_three_quarters(self):
        s = qsim.StateVector(1, [0.5, math.sqrt(3) / 2])
        np.testing.assert_allclose(probabilities(s), [0.25, 0.75], atol=1e-12)

    def test_basis(self):
        np.testing.assert_array_equal(probabilities(new_state(1)), [1.0, 0.0])

    def test_marginal_reorders_measured_bits(self):
        s = new_state(3, 0b100)  # q2 = 1
        p = qsim.marginal(probabilities(s), 3, [2, 0])
        assert p[0b01] == 1.0  # outcome bit 0 is q2


class TestMeanSquaredAmplitude:
    def test_balanced_two_qubit(self):
        s = apply_matrix(new_state(2), H2)
        assert abs(mean_squared_amplitude(s) - 0.25) < 1e-12

    def test_post_oracle(self):
        s = qsim.StateVector(2, np.array([1, -1, 1, 1]) / 2)
        # mean amplitude is 1/4
        assert abs(mean_squared_amplitude(s) - 0.0625) < 1e-12

    def test_basis_single_qubit(self):
        assert mean_squared_amplitude(new_state(1)) == pytest.approx(0.25)


class TestRun:
    def test_hadamard_is_fair(self, backend):
        hist = qsim.run(Circuit(1).h(0).measure(0), 10_000, seed=2024)
        assert sum(hist.counts.values()) == 10_000
        for outcome in (0, 1):
            assert abs(hist.counts[outcome] - 5000) <= 3 * 50

    def test_no_gates(self, backend):
        hist = qsim.run(Circuit(2).measure_all(), 100, seed=1)
        assert hist.counts == {0: 100}

    def test_empty_measurement_set(self):
        with pytest.raises(ValueError):
            qsim.run(Circuit(1).h(0), 10, seed=1)

    def test_zero_shots(self):
        with pytest.raises(ValueError):
            qsim.run(Circuit(1).h(0).measure(0), 0, seed=1)

    def test_partial_measurement(self, backend):
        c = Circuit(3).x(2).h(0).measure(2)
        assert qsim.run(c, 50, seed=3).counts == {1: 50}

    def test_deterministic(self, backend):
        c = Circuit(3).h(0).h(1).ccx(0, 1, 2).add(gate_ry(0.3), [2]).measure_all()
        a = qsim.run(c, 777, seed=99)
        b = qsim.run(c, 777, seed=99)
        assert a == b

    @pytest.mark.parametrize("threads", [2, 3, 8])
    def test_thread_count_does_not_change_histogram(self, backend, threads):
        c = Circuit(3).h(0).h(1).h(2).measure_all()
        assert qsim.run(c, 5000, 17, threads=1) == qsim.run(c, 5000, 17, threads=threads)

    def test_sampling_matches_probabilities(self, backend):
        c = Circuit(3).h(0).add(gate_ry(1.1), [1]).cx(1, 2).add(gate_rx(0.4), [2]).measure_all()
        probs = probabilities(c.simulate())
        hist = qsim.run(c, 100_000, seed=31337)
        observed = [hist.counts.get(i, 0) for i in range(8)]
        mask = probs > 0
        _, p = chisquare(np.asarray(observed)[mask], 100_000 * probs[mask])
        assert p > 0.001


@given(st.lists(st.tuples(st.sampled_from(["h", "x", "z", "rz", "cx", "ccx"]),
                          st.permutations(range(3)), st.floats(-6, 6)), max_size=20))
@settings(max_examples=60, deadline=None)
def test_norm_preserved(ops):
    c = Circuit(3)
    for name, qs, angle in ops:
        if name == "rz":
            c.rz(angle, qs[0])
        elif name == "cx":
            c.cx(qs[0], qs[1])
        elif name == "ccx":
            c.ccx(qs[0], qs[1], qs[2])
        else:
            getattr(c, name)(qs[0])
    s = new_state(3)
    for op in c.ops:
        s = apply(s, op)
        assert abs(s.norm() - 1) < 1e-12
