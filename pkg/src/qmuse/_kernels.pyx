# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: per-shot PRNG sampling and gate application.

Mirrors ``_kernels_py`` exactly; keep the two in lockstep.
"""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef uint64_t GOLDEN_GAMMA = 0x9E3779B97F4A7C15ULL
cdef double INV_2_53 = 1.0 / 9007199254740992.0


cdef inline uint64_t _splitmix64(uint64_t x) noexcept nogil:
    cdef uint64_t z = x + GOLDEN_GAMMA
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline double _shot_uniform(uint64_t master_seed, uint64_t shot) noexcept nogil:
    cdef uint64_t sm = _splitmix64(master_seed ^ shot)
    cdef uint64_t s0, s1, s2, s3, t, result
    s0 = _splitmix64(sm)
    sm += GOLDEN_GAMMA
    s1 = _splitmix64(sm)
    sm += GOLDEN_GAMMA
    s2 = _splitmix64(sm)
    sm += GOLDEN_GAMMA
    s3 = _splitmix64(sm)
    result = _rotl(s1 * 5, 7) * 9
    return (result >> 11) * INV_2_53


def splitmix64(x):
    return _splitmix64(<uint64_t>(x & 0xFFFFFFFFFFFFFFFF))


def shot_uniform(master_seed, shot_index):
    return _shot_uniform(<uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF),
                         <uint64_t>(shot_index & 0xFFFFFFFFFFFFFFFF))


def sample_counts(double[::1] cdf, master_seed, Py_ssize_t start, Py_ssize_t stop,
                  Py_ssize_t fallback):
    cdef Py_ssize_t n = cdf.shape[0]
    cdef cnp.ndarray[int64_t, ndim=1] out = np.zeros(n, dtype=np.int64)
    cdef int64_t[::1] counts = out
    cdef uint64_t seed = <uint64_t>(master_seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t shot, lo, hi, mid
    cdef double u
    with nogil:
        for shot in range(start, stop):
            u = _shot_uniform(seed, <uint64_t>shot)
            # first index with cdf[k] > u
            lo = 0
            hi = n
            while lo < hi:
                mid = (lo + hi) >> 1
                if cdf[mid] > u:
                    hi = mid
                else:
                    lo = mid + 1
            if lo >= n:
                lo = fallback
            counts[lo] += 1
    return out


def apply_single_qubit(double complex[::1] state, int n_qubits, gate,
                       int target, Py_ssize_t control_mask):
    cdef double complex m00 = gate[0, 0]
    cdef double complex m01 = gate[0, 1]
    cdef double complex m10 = gate[1, 0]
    cdef double complex m11 = gate[1, 1]
    cdef Py_ssize_t dim = (<Py_ssize_t>1) << n_qubits
    cdef Py_ssize_t bit = (<Py_ssize_t>1) << target
    cdef Py_ssize_t i
    cdef double complex a0, a1
    with nogil:
        for i in range(dim):
            if (i & bit) or (i & control_mask) != control_mask:
                continue
            a0 = state[i]
            a1 = state[i | bit]
            state[i] = m00 * a0 + m01 * a1
            state[i | bit] = m10 * a0 + m11 * a1
