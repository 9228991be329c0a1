"""Rule-constrained note selection by Grover amplitude amplification.

For the current note the rule's target row becomes a sign-flip oracle on a
4-qubit register (states 12-15 are padding), the marked states are amplified
by repeated oracle + diffuser rounds, and the most frequent measured state
over a few shots is the next note.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

import numpy as np

from . import qsim
from .markov import RuleSet, to_target_matrix
from .rng import derive_seed

DEFAULT_SHOTS = 40
N_QUBITS = 4


@dataclass(frozen=True)
class OracleMatrix:
    n_qubits: int
    diagonal: np.ndarray

    def __post_init__(self):
        d = np.array(self.diagonal, dtype=np.float64)
        d.flags.writeable = False
        object.__setattr__(self, "diagonal", d)

    @property
    def targets(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.diagonal < 0)]

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal).astype(np.complex128)


@dataclass(frozen=True)
class Diffuser:
    n_qubits: int
    matrix: np.ndarray


@dataclass(frozen=True)
class GroverConfig:
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    iteration_override: Optional[int] = None
    threads: int = 1

    def __post_init__(self):
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.iteration_override is not None and self.iteration_override < 1:
            raise ValueError("iteration_override must be a positive integer")


@dataclass(frozen=True)
class SelectionResult:
    winner: int
    histogram: qsim.Histogram
    iterations_used: int
    targets: tuple[int, ...] = ()
    retried: bool = False
    # set when neither run's majority was a target and the best target was taken
    fallback: bool = False


def build_oracle(target_row: Sequence[int], n_qubits: int = N_QUBITS) -> OracleMatrix:
    row = np.asarray(target_row)
    if row.ndim != 1 or len(row) > (1 << n_qubits):
        raise ValueError(f"target row of length {len(row)} does not fit {n_qubits} qubits")
    if not np.any(row):
        raise ValueError("target row marks no states")
    diag = np.ones(1 << n_qubits)
    diag[np.flatnonzero(row)] = -1.0
    return OracleMatrix(n_qubits, diag)


def shift_operator(n_qubits: int) -> np.ndarray:
    """diag(1, -1, ..., -1): phase pi on every basis state except |0...0>."""
    if n_qubits < 1:
        raise ValueError("n_qubits must be >= 1")
    d = -np.ones(1 << n_qubits, dtype=np.complex128)
    d[0] = 1.0
    return np.diag(d)


@lru_cache(maxsize=None)
def hadamard_all(n_qubits: int) -> np.ndarray:
    h = np.ones((1, 1), dtype=np.complex128)
    for _ in range(n_qubits):
        h = qsim.tensor(h, qsim.gate_h())
    h.flags.writeable = False
    return h


@lru_cache(maxsize=None)
def diffuser(n_qubits: int) -> Diffuser:
    h = hadamard_all(n_qubits)
    m = h @ shift_operator(n_qubits) @ h
    m.flags.writeable = False
    return Diffuser(n_qubits, m)


def grover_iterations(n_qubits: int, n_targets: int) -> int:
    if not 1 <= n_targets <= (1 << n_qubits):
        raise ValueError(f"number of targets must be in 1..{1 << n_qubits}, got {n_targets}")
    return max(1, math.floor(0.7854 * math.sqrt((1 << n_qubits) / n_targets)))


def target_probability(n_qubits: int, n_targets: int, iterations: int) -> float:
    """Closed-form total probability on the targets after ``iterations`` rounds."""
    theta = math.asin(math.sqrt(n_targets / (1 << n_qubits)))
    return math.sin((2 * iterations + 1) * theta) ** 2


def uniform_state(n_qubits: int) -> qsim.StateVector:
    c = qsim.Circuit(n_qubits)
    for q in range(n_qubits):
        c.h(q)
    return c.simulate()


def amplified_state(oracle: OracleMatrix, iterations: int) -> qsim.StateVector:
    state = uniform_state(oracle.n_qubits)
    o = oracle.matrix
    d = diffuser(oracle.n_qubits).matrix
    for _ in range(iterations):
        state = qsim.apply_matrix(state, o)
        state = qsim.apply_matrix(state, d)
    return state


def interference_circuit() -> qsim.Circuit:
    """Gate-level two-qubit circuit that marks |01> and amplifies it.

    The two Rz(pi/2) on q0 plus a controlled Z form the oracle (up to a
    global phase); X-conjugated controlled Z between Hadamard layers forms the
    diffuser, again up to global phase.
    """
    c = qsim.Circuit(2)
    c.h(0).h(1)
    c.rz(math.pi / 2, 0).cz(0, 1).rz(math.pi / 2, 0)
    c.h(0).h(1).x(0).x(1)
    c.cz(0, 1)
    c.x(0).x(1).h(0).h(1)
    return c.measure(0, 1)


def grover_run(oracle: OracleMatrix, config: GroverConfig) -> SelectionResult:
    targets = tuple(oracle.targets)
    iterations = config.iteration_override or grover_iterations(oracle.n_qubits, len(targets))
    state = amplified_state(oracle, iterations)
    hist = qsim.sample(state, range(oracle.n_qubits), config.shots, config.seed, config.threads)
    return SelectionResult(hist.most_frequent()[0], hist, iterations, targets)


def select_next(rules: RuleSet, current: int, config: GroverConfig,
                n_qubits: int = N_QUBITS) -> SelectionResult:
    """Pick the successor of ``current`` under ``rules``.

    A non-target majority triggers one rerun on ``derive_seed(seed, 1)``; if
    that also misses, the most frequent target of the rerun wins and the
    result is flagged with ``fallback``.
    """
    row = to_target_matrix(rules)[rules.row_of(current)]
    oracle = build_oracle(row, n_qubits)
    result = grover_run(oracle, config)
    if result.winner in result.targets:
        return result
    retry_cfg = GroverConfig(config.shots, derive_seed(config.seed, 1),
                             config.iteration_override, config.threads)
    retry = grover_run(oracle, retry_cfg)
    if retry.winner in retry.targets:
        return SelectionResult(retry.winner, retry.histogram, retry.iterations_used,
                               retry.targets, retried=True)
    counts = retry.histogram.counts
    best = max(retry.targets, key=lambda t: (counts.get(t, 0), -t))
    return SelectionResult(best, retry.histogram, retry.iterations_used, retry.targets,
                           retried=True, fallback=True)


@dataclass
class Composition:
    notes: list[int]
    cycles: list[SelectionResult]


def generate(rules: RuleSet, start: int, length: int, config: GroverConfig) -> Composition:
    """Generate ``length`` notes after ``start``; cycle ``k`` uses ``derive_seed(seed, k)``."""
    if length < 1:
        raise ValueError("length must be >= 1")
    notes = [start]
    cycles = []
    for k in range(length):
        cfg = GroverConfig(config.shots, derive_seed(config.seed, k),
                           config.iteration_override, config.threads)
        res = select_next(rules, notes[-1], cfg)
        cycles.append(res)
        notes.append(res.winner)
    return Composition(notes, cycles)


def state_label(index: int, n_qubits: int = N_QUBITS) -> str:
    return format(index, f"0{n_qubits}b")


def cycles_to_dict(comp: Composition, rules: RuleSet, n_qubits: int = N_QUBITS) -> dict:
    alpha = rules.alphabet
    out = []
    for k, res in enumerate(comp.cycles):
        shots = res.histogram.shots
        out.append({
            "cycle": k + 1,
            "current": alpha.label(comp.notes[k]),
            "targets": [state_label(t, n_qubits) for t in res.targets],
            "iterations": res.iterations_used,
            "histogram": {
                state_label(s, n_qubits): {"count": c, "percent": 100.0 * c / shots}
                for s, c in sorted(res.histogram.counts.items())
            },
            "winner": state_label(res.winner, n_qubits),
            "winner_note": alpha.label(res.winner),
            "retried": res.retried,
            "fallback": res.fallback,
        })
    return {
        "sequence": [alpha.label(n) for n in comp.notes],
        "cycles": out,
    }


def cycles_to_json(comp: Composition, rules: RuleSet) -> str:
    return json.dumps(cycles_to_dict(comp, rules), indent=2, ensure_ascii=False) + "\n"


def cycles_to_csv(comp: Composition, rules: RuleSet, n_qubits: int = N_QUBITS) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["cycle", "state", "count", "percent", "winner"])
    for k, res in enumerate(comp.cycles):
        for s, c in sorted(res.histogram.counts.items()):
            w.writerow([k + 1, state_label(s, n_qubits), c,
                        f"{100.0 * c / res.histogram.shots:.1f}", int(s == res.winner)])
    return buf.getvalue()
