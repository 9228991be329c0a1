"""Quantum-walk note generators: a one-qubit die walk and a walk on the 3-cube.

Cube vertices are stored as integers whose bit ``k`` is qubit ``q_k``. Their
printed labels list the qubits in the order q0 q1 q2, so vertex ``"001"`` has
only ``q2`` set (integer 4). Plotting tools that print ``q2 q1 q0`` show the
same labels reversed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional

from . import qsim
from .rng import Xoshiro256, derive_seed

DEFAULT_SHOTS = 40
INPUT_QUBITS = (0, 1, 2)
DICE_QUBITS = (3, 4)

# Substream tags below a per-step seed.
_PITCH_STREAM = 0
_RHYTHM_STREAM = 1
_TIE_STREAM = 0x7469655F627265  # "tie_bre"

LABEL_ORDER_NOTE = (
    "labels list qubits as q0 q1 q2; histogram plots that print q2 q1 q0 "
    "show the digits in reverse order"
)


def vertex_label(code: int) -> str:
    if not 0 <= code <= 7:
        raise ValueError(f"cube vertex code must be 0..7, got {code}")
    return "".join(str((code >> q) & 1) for q in INPUT_QUBITS)


def parse_vertex(label: str | int) -> int:
    """Integer code of a vertex given as a q0q1q2 label (or an int code)."""
    if isinstance(label, int):
        vertex_label(label)
        return label
    s = label.strip()
    if len(s) != 3 or set(s) - {"0", "1"}:
        raise ValueError(f"cube vertex must be three binary digits, got {label!r}")
    return sum(int(bit) << q for q, bit in zip(INPUT_QUBITS, s))


def hamming(a: int, b: int) -> int:
    return bin(a ^ b).count("1")


@dataclass(frozen=True)
class WalkConfig:
    steps: int = 29
    shots: int = DEFAULT_SHOTS
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.steps < 0:
            raise ValueError("steps must be >= 0")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


# -- one-dimensional walk ------------------------------------------------------

def die_circuit() -> qsim.Circuit:
    return qsim.Circuit(1).h(0).measure(0)


def quantum_die(seed: int) -> int:
    """Roll the one-qubit Hadamard die once."""
    hist = qsim.run(die_circuit(), shots=1, seed=seed)
    return next(iter(hist.counts))


def walk1d_step(current: int, alphabet_size: int, die: int) -> int:
    if not 0 <= current < alphabet_size:
        raise ValueError(f"note index {current} outside 0..{alphabet_size - 1}")
    if current == 0:
        return 1
    if current == alphabet_size - 1:
        return current - 1
    return current - 1 if die == 0 else current + 1


def walk1d_generate(start: int, steps: int, config: WalkConfig,
                    alphabet_size: int = 12) -> tuple[list[int], list[int]]:
    """Walk ``steps`` notes from ``start``; returns ``(notes, die_rolls)``.

    Roll ``k`` uses the substream ``derive_seed(config.seed, k)``.
    """
    if not 0 <= start < alphabet_size:
        raise ValueError(f"start index {start} outside 0..{alphabet_size - 1}")
    notes = [start]
    rolls = []
    for k in range(steps):
        die = quantum_die(derive_seed(config.seed, k))
        rolls.append(die)
        notes.append(walk1d_step(notes[-1], alphabet_size, die))
    return notes, rolls


# -- cube walk -----------------------------------------------------------------

def cube_circuit(start: int) -> qsim.Circuit:
    """Five-qubit walk circuit: inputs q0..q2 armed to ``start``, dice q3/q4.

    Dice branches, by the values the Hadamards give q3 and q4: (0, 1) flips
    q0, (0, 0) flips q1, (1, 1) flips q2 and (1, 0) leaves the input alone.
    The X gates on q4 leave it inverted at the end; it is not measured.
    """
    code = parse_vertex(start)
    c = qsim.Circuit(5)
    for q in INPUT_QUBITS:
        if (code >> q) & 1:
            c.x(q)
    c.h(3).h(4)
    c.cx(4, 0)
    c.x(4)
    c.cx(4, 1)
    c.cx(3, 2)
    c.ccx(3, 4, 1)
    c.x(4)
    c.ccx(3, 4, 0)
    c.x(4)
    c.ccx(3, 4, 2)
    c.measure(*INPUT_QUBITS)
    return c


def majority_vote(hist: qsim.Histogram, tie_seed: int) -> int:
    """Most frequent outcome; ties are settled by a seeded uniform draw."""
    tied = hist.most_frequent()
    if len(tied) == 1:
        return tied[0]
    return tied[Xoshiro256(tie_seed).randrange(len(tied))]


def cube_step_histogram(current: int, shots: int, seed: int,
                        threads: int = 1) -> tuple[int, qsim.Histogram]:
    hist = qsim.run(cube_circuit(current), shots, seed, threads)
    return majority_vote(hist, derive_seed(seed, _TIE_STREAM)), hist


def cube_step(current: int, config: WalkConfig, seed: Optional[int] = None) -> int:
    """One majority-voted walk step; ``seed`` defaults to ``config.seed``."""
    winner, _ = cube_step_histogram(
        current, config.shots, config.seed if seed is None else seed, config.threads
    )
    return winner


@dataclass(frozen=True)
class StepRecord:
    step: int
    pitch: int
    rhythm: int
    pitch_histogram: Optional[qsim.Histogram] = None
    rhythm_histogram: Optional[qsim.Histogram] = None


@dataclass
class WalkTrace:
    records: list[StepRecord] = field(default_factory=list)
    shots: int = DEFAULT_SHOTS
    seed: int = 0

    def codes(self) -> list[tuple[int, int]]:
        return [(r.pitch, r.rhythm) for r in self.records]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "pitch_code", "rhythm_code"])
        for r in self.records:
            w.writerow([r.step, vertex_label(r.pitch), vertex_label(r.rhythm)])
        return buf.getvalue()

    def to_dict(self) -> dict:
        def hist(h):
            if h is None:
                return None
            return {vertex_label(k): h.counts.get(k, 0) for k in sorted(range(8), key=vertex_label)}

        return {
            "label_order": "q0q1q2",
            "note": LABEL_ORDER_NOTE,
            "shots": self.shots,
            "seed": self.seed,
            "steps": [
                {
                    "step": r.step,
                    "pitch_code": vertex_label(r.pitch),
                    "rhythm_code": vertex_label(r.rhythm),
                    "pitch_histogram": hist(r.pitch_histogram),
                    "rhythm_histogram": hist(r.rhythm_histogram),
                }
                for r in self.records
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, ensure_ascii=False) + "\n"


def cube_generate(start_pitch: int | str, start_rhythm: int | str,
                  config: WalkConfig) -> WalkTrace:
    """Walk the pitch cube and the rhythm cube in parallel for ``config.steps`` steps.

    Record 0 is the armed start; each later record re-arms from the previous
    winners. Step ``k`` samples with ``derive_seed(seed, k, 0)`` for pitch and
    ``derive_seed(seed, k, 1)`` for rhythm.
    """
    pitch, rhythm = parse_vertex(start_pitch), parse_vertex(start_rhythm)
    trace = WalkTrace([StepRecord(0, pitch, rhythm)], config.shots, config.seed)
    for k in range(1, config.steps + 1):
        pitch, ph = cube_step_histogram(
            pitch, config.shots, derive_seed(config.seed, k, _PITCH_STREAM), config.threads
        )
        rhythm, rh = cube_step_histogram(
            rhythm, config.shots, derive_seed(config.seed, k, _RHYTHM_STREAM), config.threads
        )
        trace.records.append(StepRecord(k, pitch, rhythm, ph, rh))
    return trace
