"""Dense statevector simulator for small gate circuits.

Basis ordering is little-endian: bit ``k`` of a basis index is qubit ``q_k``,
so ``|q1 q0>`` written as a string has ``q0`` on the right.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import kernels

MAX_DENSE_QUBITS = 8
UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def to_json(self) -> str:
        """Debug dump as a JSON array of ``[re, im]`` pairs."""
        return json.dumps([[float(a.real), float(a.imag)] for a in self.amplitudes])


def new_state(n_qubits: int, basis_index: int = 0) -> StateVector:
    if n_qubits < 1 or n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"n_qubits must be in 1..{MAX_DENSE_QUBITS}, got {n_qubits}")
    if not 0 <= basis_index < (1 << n_qubits):
        raise ValueError(f"basis index {basis_index} out of range for {n_qubits} qubits")
    amps = np.zeros(1 << n_qubits, dtype=np.complex128)
    amps[basis_index] = 1.0
    return StateVector(n_qubits, amps)


# -- gates -------------------------------------------------------------------

def _check_angles(*angles: float) -> None:
    for a in angles:
        if not math.isfinite(a):
            raise ValueError(f"gate angle must be finite, got {a!r}")


def gate_i() -> np.ndarray:
    return np.eye(2, dtype=np.complex128)


def gate_h() -> np.ndarray:
    return np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)


def gate_x() -> np.ndarray:
    return np.array([[0, 1], [1, 0]], dtype=np.complex128)


def gate_z() -> np.ndarray:
    return np.array([[1, 0], [0, -1]], dtype=np.complex128)


def gate_rz(phi: float) -> np.ndarray:
    _check_angles(phi)
    return np.array(
        [[np.exp(-0.5j * phi), 0], [0, np.exp(0.5j * phi)]], dtype=np.complex128
    )


def gate_ry(theta: float) -> np.ndarray:
    _check_angles(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def gate_rx(theta: float) -> np.ndarray:
    _check_angles(theta)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=np.complex128)


def gate_u(theta: float, phi: float, lam: float) -> np.ndarray:
    """Generic single-qubit rotation with three Euler angles."""
    _check_angles(theta, phi, lam)
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=np.complex128,
    )


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product; ``a`` occupies the more significant qubits."""
    return np.kron(np.asarray(a, dtype=np.complex128), np.asarray(b, dtype=np.complex128))


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol)


def equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-12) -> bool:
    """True when ``a == e^{i t} b`` for some global phase ``t``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        return False
    k = np.unravel_index(np.argmax(np.abs(b)), b.shape)
    if abs(b[k]) < tol:
        return bool(np.max(np.abs(a)) < tol)
    phase = a[k] / b[k]
    if abs(abs(phase) - 1) > tol:
        return False
    return bool(np.max(np.abs(a - phase * b)) < tol)


# -- circuits ----------------------------------------------------------------

@dataclass(frozen=True)
class CircuitOp:
    gate: np.ndarray
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    name: str = ""

    def __post_init__(self):
        g = np.array(self.gate, dtype=np.complex128)
        g.flags.writeable = False
        object.__setattr__(self, "gate", g)
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(self, "controls", tuple(int(c) for c in self.controls))
        k = len(self.targets)
        if k == 0:
            raise ValueError("an operation needs at least one target qubit")
        if g.shape != (1 << k, 1 << k):
            raise ValueError(f"gate of shape {g.shape} does not act on {k} target qubit(s)")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"control and target qubits overlap: {qubits}")
        if any(q < 0 for q in qubits):
            raise ValueError("qubit indices must be non-negative")

    def validate_for(self, n_qubits: int) -> None:
        bad = [q for q in self.targets + self.controls if q >= n_qubits]
        if bad:
            raise ValueError(f"qubit index {bad[0]} out of range for {n_qubits} qubits")


def full_unitary(op: CircuitOp, n_qubits: int) -> np.ndarray:
    """The 2^n x 2^n matrix of ``op`` acting on an ``n_qubits`` register."""
    op.validate_for(n_qubits)
    dim = 1 << n_qubits
    k = len(op.targets)
    control_mask = sum(1 << c for c in op.controls)
    target_mask = sum(1 << t for t in op.targets)
    u = np.zeros((dim, dim), dtype=np.complex128)
    for col in range(dim):
        if col & control_mask != control_mask:
            u[col, col] = 1.0
            continue
        # local index: bit j = value of targets[j]
        local_in = sum(((col >> t) & 1) << j for j, t in enumerate(op.targets))
        rest = col & ~target_mask
        for local_out in range(1 << k):
            row = rest | sum(((local_out >> j) & 1) << t for j, t in enumerate(op.targets))
            u[row, col] = op.gate[local_out, local_in]
    return u


def apply(state: StateVector, op: CircuitOp) -> StateVector:
    op.validate_for(state.n_qubits)
    if len(op.targets) == 1:
        amps = state.amplitudes.copy()
        control_mask = sum(1 << c for c in op.controls)
        kernels.apply_single_qubit(amps, state.n_qubits, op.gate, op.targets[0], control_mask)
        return StateVector(state.n_qubits, amps)
    return StateVector(state.n_qubits, full_unitary(op, state.n_qubits) @ state.amplitudes)


def apply_matrix(state: StateVector, full: np.ndarray) -> StateVector:
    full = np.asarray(full, dtype=np.complex128)
    if full.shape != (state.dim, state.dim):
        raise ValueError(f"matrix of shape {full.shape} does not match dimension {state.dim}")
    if not is_unitary(full):
        raise ValueError("matrix is not unitary")
    return StateVector(state.n_qubits, full @ state.amplitudes)


@dataclass
class Circuit:
    """Ordered gate list on ``n_qubits``, measured on ``measured_qubits`` at the end."""

    n_qubits: int
    ops: list[CircuitOp] = field(default_factory=list)
    measured_qubits: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_DENSE_QUBITS:
            raise ValueError(f"n_qubits must be in 1..{MAX_DENSE_QUBITS}")

    def add(self, gate: np.ndarray, targets: Sequence[int], controls: Sequence[int] = (),
            name: str = "") -> "Circuit":
        op = CircuitOp(gate, tuple(targets), tuple(controls), name)
        op.validate_for(self.n_qubits)
        self.ops.append(op)
        return self

    def h(self, q: int) -> "Circuit":
        return self.add(gate_h(), [q], name="h")

    def x(self, q: int) -> "Circuit":
        return self.add(gate_x(), [q], name="x")

    def z(self, q: int) -> "Circuit":
        return self.add(gate_z(), [q], name="z")

    def rz(self, phi: float, q: int) -> "Circuit":
        return self.add(gate_rz(phi), [q], name="rz")

    def cx(self, control: int, target: int) -> "Circuit":
        return self.add(gate_x(), [target], [control], name="cx")

    def cz(self, control: int, target: int) -> "Circuit":
        return self.add(gate_z(), [target], [control], name="cz")

    def ccx(self, c1: int, c2: int, target: int) -> "Circuit":
        return self.add(gate_x(), [target], [c1, c2], name="ccx")

    def measure(self, *qubits: int) -> "Circuit":
        for q in qubits:
            if not 0 <= q < self.n_qubits:
                raise ValueError(f"cannot measure qubit {q} of a {self.n_qubits}-qubit circuit")
            if q in self.measured_qubits:
                raise ValueError(f"qubit {q} is already measured")
            self.measured_qubits.append(q)
        return self

    def measure_all(self) -> "Circuit":
        return self.measure(*[q for q in range(self.n_qubits) if q not in self.measured_qubits])

    def simulate(self, initial: StateVector | None = None) -> StateVector:
        state = initial if initial is not None else new_state(self.n_qubits)
        if state.n_qubits != self.n_qubits:
            raise ValueError("initial state has the wrong number of qubits")
        for op in self.ops:
            state = apply(state, op)
        return state

    def unitary(self) -> np.ndarray:
        u = np.eye(1 << self.n_qubits, dtype=np.complex128)
        for op in self.ops:
            u = full_unitary(op, self.n_qubits) @ u
        return u


# -- measurement -------------------------------------------------------------

def probabilities(state: StateVector) -> np.ndarray:
    return np.abs(state.amplitudes) ** 2


def mean_squared_amplitude(state: StateVector) -> float:
    """Squared magnitude of the mean amplitude over all basis states."""
    return float(abs(np.mean(state.amplitudes)) ** 2)


def marginal(probs: np.ndarray, n_qubits: int, measured: Sequence[int]) -> np.ndarray:
    """Distribution of the measured qubits; outcome bit ``j`` is ``measured[j]``."""
    measured = list(measured)
    if list(range(len(measured))) == measured and len(measured) == n_qubits:
        return np.asarray(probs, dtype=np.float64)
    idx = np.arange(1 << n_qubits)
    outcome = np.zeros_like(idx)
    for j, q in enumerate(measured):
        outcome |= ((idx >> q) & 1) << j
    return np.bincount(outcome, weights=probs, minlength=1 << len(measured))


@dataclass(frozen=True)
class Histogram:
    counts: dict[int, int]
    shots: int
    n_bits: int

    def most_frequent(self) -> list[int]:
        """All outcomes sharing the top count, in ascending order."""
        top = max(self.counts.values())
        return sorted(k for k, v in self.counts.items() if v == top)

    def label(self, outcome: int) -> str:
        return format(outcome, f"0{self.n_bits}b")

    def frequencies(self) -> dict[int, float]:
        return {k: v / self.shots for k, v in sorted(self.counts.items())}


def sample(state: StateVector, measured: Sequence[int], shots: int, seed: int,
           threads: int = 1) -> Histogram:
    """Draw ``shots`` measurement outcomes of ``measured`` from ``state``.

    The user seed is first mixed into a 64-bit master seed; shot ``s`` then
    uses the substream seeded by ``splitmix64(master ^ s)``, so the histogram
    is independent of ``threads``. Without the mixing step, small seeds would
    XOR the shot indices into nearly the same set of substreams.
    """
    if shots < 1:
        raise ValueError("shots must be >= 1")
    if not measured:
        raise ValueError("no qubits are measured")
    probs = marginal(probabilities(state), state.n_qubits, measured)
    cdf = np.ascontiguousarray(np.cumsum(probs), dtype=np.float64)
    fallback = int(np.flatnonzero(probs > 0)[-1])
    seed = kernels.splitmix64(seed & kernels.MASK64)

    threads = max(1, min(threads, shots))
    if threads == 1:
        counts = kernels.sample_counts(cdf, seed, 0, shots, fallback)
    else:
        bounds = np.linspace(0, shots, threads + 1).astype(int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(
                lambda ab: kernels.sample_counts(cdf, seed, int(ab[0]), int(ab[1]), fallback),
                zip(bounds[:-1], bounds[1:]),
            )
            counts = sum(parts)
    return Histogram(
        {int(k): int(counts[k]) for k in np.flatnonzero(counts)}, shots, len(measured)
    )


def run(circuit: Circuit, shots: int, seed: int, threads: int = 1,
        initial: StateVector | None = None) -> Histogram:
    if not circuit.measured_qubits:
        raise ValueError("circuit has no measured qubits")
    if shots < 1:
        raise ValueError("shots must be >= 1")
    state = circuit.simulate(initial)
    return sample(state, circuit.measured_qubits, shots, seed, threads)
