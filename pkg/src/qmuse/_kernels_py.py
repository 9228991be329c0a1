"""Pure-Python/numpy versions of the hot kernels.

Must stay output-identical to ``_kernels.pyx``; ``tests/test_kernels.py``
runs both side by side when the compiled module is available.
"""

from __future__ import annotations

from bisect import bisect_right
from functools import lru_cache

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


def splitmix64(x: int) -> int:
    """One splitmix64 output for generator state ``x`` (state is advanced first)."""
    z = (x + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


def xoshiro_seed(seed: int) -> list[int]:
    """Expand a 64-bit seed into xoshiro256** state with a splitmix64 stream."""
    state = []
    sm = seed & MASK64
    for _ in range(4):
        state.append(splitmix64(sm))
        sm = (sm + GOLDEN_GAMMA) & MASK64
    return state


def xoshiro_next(s: list[int]) -> int:
    """Advance xoshiro256** state ``s`` in place and return the next output."""
    result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
    t = (s[1] << 17) & MASK64
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def shot_uniform(master_seed: int, shot_index: int) -> float:
    """First uniform double in [0, 1) of the substream owned by one shot."""
    sub = splitmix64((master_seed ^ shot_index) & MASK64)
    s = xoshiro_seed(sub)
    return (xoshiro_next(s) >> 11) * _INV_2_53


def sample_counts(cdf: np.ndarray, master_seed: int, start: int, stop: int,
                  fallback: int) -> np.ndarray:
    """Count outcomes of shots ``start..stop-1`` drawn against ``cdf``.

    ``fallback`` is the outcome used when a draw lands beyond ``cdf[-1]``
    (rounding leaves the last cumulative value a hair under 1).
    """
    edges = cdf.tolist()
    n = len(edges)
    counts = [0] * n
    master_seed &= MASK64
    for shot in range(start, stop):
        k = bisect_right(edges, shot_uniform(master_seed, shot))
        counts[k if k < n else fallback] += 1
    return np.asarray(counts, dtype=np.int64)


@lru_cache(maxsize=256)
def _pair_indices(n_qubits: int, target: int, control_mask: int):
    idx = np.arange(1 << n_qubits)
    keep = ((idx >> target) & 1 == 0) & ((idx & control_mask) == control_mask)
    lo = idx[keep]
    return lo, lo | (1 << target)


def apply_single_qubit(state: np.ndarray, n_qubits: int, gate: np.ndarray,
                       target: int, control_mask: int) -> None:
    """Apply a (controlled) 2x2 gate to ``state`` in place."""
    lo, hi = _pair_indices(n_qubits, target, control_mask)
    a0 = state[lo]
    a1 = state[hi]
    state[lo] = gate[0, 0] * a0 + gate[0, 1] * a1
    state[hi] = gate[1, 0] * a0 + gate[1, 1] * a1
