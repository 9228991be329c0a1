import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmuse import qsim
from qmuse.basak_miranda import (
    GroverConfig,
    amplified_state,
    build_oracle,
    cycles_to_csv,
    cycles_to_json,
    diffuser,
    generate,
    grover_iterations,
    grover_run,
    interference_circuit,
    select_next,
    shift_operator,
    target_probability,
)
from qmuse.markov import RuleSet, ruleset_default, to_target_matrix

from reference_data import GROVER_CHAIN, H2, PRINTED_RULE2_ORACLE, RULE_TABLE

RULE2_ROW = [1, 0, 0, 1, 1, 0, 1, 0, 0, 0, 0, 0]


def hadamard_n(n):
    h = np.array([[1.0]])
    for _ in range(n):
        h = np.kron(h, np.array([[1, 1], [1, -1]]) / math.sqrt(2))
    return h


def brute_force_target_probability(row, iterations):
    """Plain matrix products, no qsim: uniform start, then oracle + diffuser rounds."""
    n = 4
    dim = 16
    oracle = np.eye(dim)
    for i in np.flatnonzero(row):
        oracle[i, i] = -1
    s = -np.eye(dim)
    s[0, 0] = 1
    h = hadamard_n(n)
    d = h @ s @ h
    psi = np.full(dim, 0.25)
    for _ in range(iterations):
        psi = d @ (oracle @ psi)
    return float(np.sum(np.abs(psi[np.flatnonzero(row)]) ** 2))


class TestOracle:
    def test_rule2(self):
        o = build_oracle(RULE2_ROW)
        assert o.targets == [0, 3, 4, 6]
        np.testing.assert_array_equal(o.matrix.real, PRINTED_RULE2_ORACLE)

    def test_two_qubit(self):
        np.testing.assert_array_equal(build_oracle([0, 1, 0, 0], 2).diagonal, [1, -1, 1, 1])

    def test_single_target_zero(self):
        np.testing.assert_array_equal(build_oracle([1] + [0] * 11).diagonal, [-1] + [1] * 15)

    def test_empty_row(self):
        with pytest.raises(ValueError):
            build_oracle([0] * 12)

    def test_padding_never_marked(self):
        t = to_target_matrix(ruleset_default())
        for row in t:
            o = build_oracle(row)
            assert np.all(o.diagonal[12:] == 1)
            assert len(o.targets) == row.sum()


class TestShiftAndDiffuser:
    def test_shift_n2(self):
        np.testing.assert_array_equal(shift_operator(2), np.diag([1, -1, -1, -1]))

    def test_shift_n1(self):
        np.testing.assert_array_equal(shift_operator(1), np.diag([1, -1]))

    def test_shift_n4(self):
        np.testing.assert_array_equal(np.diag(shift_operator(4)), [1] + [-1] * 15)

    def test_n1_is_x(self):
        np.testing.assert_allclose(diffuser(1).matrix, [[0, 1], [1, 0]], atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_uniform_fixed_up_to_sign(self, n):
        u = np.full(2**n, 2 ** (-n / 2))
        out = diffuser(n).matrix @ u
        assert np.allclose(out, u) or np.allclose(out, -u)

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_matches_independent_product(self, n):
        s = -np.eye(2**n)
        s[0, 0] = 1
        h = hadamard_n(n)
        np.testing.assert_allclose(diffuser(n).matrix, h @ s @ h, atol=1e-12)

    def test_unitarity(self):
        d = diffuser(4).matrix
        for row in to_target_matrix(ruleset_default()):
            o = build_oracle(row).matrix
            g = d @ o
            assert np.max(np.abs(g.conj().T @ g - np.eye(16))) < 1e-10
        assert qsim.is_unitary(d, 1e-12)


class TestIterations:
    @pytest.mark.parametrize("n,t,i", [(2, 1, 1), (4, 4, 1), (4, 2, 2), (4, 3, 1)])
    def test_formula(self, n, t, i):
        assert grover_iterations(n, t) == i

    def test_floor_at_one(self):
        assert grover_iterations(4, 16) == 1

    @pytest.mark.parametrize("t", [0, 17])
    def test_bad_target_count(self, t):
        with pytest.raises(ValueError):
            grover_iterations(4, t)

    @pytest.mark.parametrize("n,t,i,p", [(2, 1, 1, 1.0), (4, 4, 1, 1.0), (4, 3, 1, 0.94921875),
                                         (4, 2, 2, 0.9453125)])
    def test_target_probability(self, n, t, i, p):
        assert target_probability(n, t, i) == pytest.approx(p, abs=1e-12)


class TestChain:
    def test_two_qubit_chain(self):
        psi = H2 @ np.array([1, 0, 0, 0])
        oracle = build_oracle([0, 1, 0, 0], 2).matrix
        steps = [oracle, H2, shift_operator(2), H2]
        for op, expected in zip(steps, GROVER_CHAIN):
            psi = op @ psi
            np.testing.assert_allclose(psi, expected, atol=1e-12)
        assert abs(abs(psi[1]) ** 2 - 1.0) < 1e-10

    def test_grover_run_two_qubit(self):
        res = grover_run(build_oracle([0, 1, 0, 0], 2), GroverConfig(seed=1))
        assert res.winner == 1 and res.histogram.counts == {1: 40}
        assert res.iterations_used == 1

    def test_rule2_exact_quarter_each(self):
        probs = qsim.probabilities(amplified_state(build_oracle(RULE2_ROW), 1))
        np.testing.assert_allclose(probs[[0, 3, 4, 6]], 0.25, atol=1e-9)

    @pytest.mark.parametrize("k", range(12))
    def test_every_rule_matches_brute_force(self, k):
        row = to_target_matrix(ruleset_default())[k]
        t = int(row.sum())
        i = grover_iterations(4, t)
        probs = qsim.probabilities(amplified_state(build_oracle(row), i))
        simulated = probs[np.flatnonzero(row)].sum()
        assert abs(simulated - brute_force_target_probability(row, i)) < 1e-9
        assert abs(simulated - target_probability(4, t, i)) < 1e-9


class TestInterferenceCircuit:
    def test_final_state(self):
        probs = qsim.probabilities(interference_circuit().simulate())
        np.testing.assert_allclose(probs, [0, 1, 0, 0], atol=1e-12)

    def test_unitary_matches_matrices(self):
        expected = diffuser(2).matrix @ build_oracle([0, 1, 0, 0], 2).matrix @ H2
        assert qsim.equal_up_to_phase(interference_circuit().unitary(), expected)

    def test_sampled(self):
        hist = qsim.run(interference_circuit(), 40, seed=0)
        assert hist.counts == {1: 40}


class TestSelectNext:
    rules = ruleset_default()

    @pytest.mark.parametrize("note", list(RULE_TABLE))
    def test_winner_allowed(self, note):
        a = self.rules.alphabet
        for seed in range(5):
            res = select_next(self.rules, a.index(note), GroverConfig(seed=seed))
            assert a.label(res.winner) in RULE_TABLE[note]

    def test_f_targets(self):
        res = select_next(self.rules, self.rules.alphabet.index("F"), GroverConfig(seed=4))
        assert res.targets == (0, 2, 7, 9)

    def test_padding_never_wins(self):
        for seed in range(1000):
            note = seed % 12
            res = select_next(self.rules, note, GroverConfig(seed=seed))
            assert res.winner < 12
            assert self.rules.allows(note, res.winner)

    def test_retry_then_fallback(self):
        # three rounds on a 2-of-16 oracle overshoot: about a third of the mass on targets
        rules = RuleSet({i: frozenset({(i + 1) % 12, (i + 2) % 12}) for i in range(12)})
        outcomes = [select_next(rules, 0, GroverConfig(shots=1, seed=s, iteration_override=3))
                    for s in range(200)]
        assert any(r.retried for r in outcomes)
        assert any(r.fallback for r in outcomes)
        for r in outcomes:
            assert r.winner in (1, 2)

    def test_iteration_override(self):
        res = select_next(self.rules, 0, GroverConfig(seed=0, iteration_override=3))
        assert res.iterations_used == 3

    def test_config_validation(self):
        with pytest.raises(ValueError):
            GroverConfig(shots=0)
        with pytest.raises(ValueError):
            GroverConfig(iteration_override=0)


class TestGenerate:
    def test_length_and_start(self):
        comp = generate(ruleset_default(), 5, 3, GroverConfig(seed=3))
        assert len(comp.notes) == 4 and comp.notes[0] == 5
        assert comp.notes[1] in {0, 3, 4, 6}

    def test_forced_sequence(self):
        rules = RuleSet({i: frozenset({(i + 5) % 12}) for i in range(12)})
        comp = generate(rules, 0, 12, GroverConfig(seed=1))
        assert comp.notes == [(5 * k) % 12 for k in range(13)]

    def test_long_run_obeys_rules(self):
        rules = ruleset_default()
        comp = generate(rules, 0, 1000, GroverConfig(seed=12))
        assert rules.violations(comp.notes) == []

    def test_deterministic(self):
        rules = ruleset_default()
        a = generate(rules, 5, 20, GroverConfig(seed=2))
        b = generate(rules, 5, 20, GroverConfig(seed=2, threads=3))
        assert a.notes == b.notes
        assert cycles_to_json(a, rules) == cycles_to_json(b, rules)

    def test_bad_length(self):
        with pytest.raises(ValueError):
            generate(ruleset_default(), 0, 0, GroverConfig())

    def test_exports(self):
        rules = ruleset_default()
        comp = generate(rules, 5, 2, GroverConfig(seed=2))
        data = json.loads(cycles_to_json(comp, rules))
        assert data["sequence"][0] == "D♯"
        c1 = data["cycles"][0]
        assert c1["targets"] == ["0000", "0011", "0100", "0110"]
        assert sum(v["count"] for v in c1["histogram"].values()) == 40
        assert sum(v["percent"] for v in c1["histogram"].values()) == pytest.approx(100)
        rows = list(csv.reader(io.StringIO(cycles_to_csv(comp, rules))))
        assert rows[0] == ["cycle", "state", "count", "percent", "winner"]
        assert sum(int(r[4]) for r in rows[1:]) == 2


@given(st.integers(0, 2**64 - 1), st.integers(0, 11))
@settings(max_examples=40, deadline=None)
def test_any_seed_respects_rules(seed, start):
    rules = ruleset_default()
    comp = generate(rules, start, 30, GroverConfig(seed=seed))
    assert rules.violations(comp.notes) == []
    assert max(comp.notes) < 12
