# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte-Carlo acceptance counter for the randomized mechanism.

Semantics are identical to :mod:`pruneprice._kernels_py`; see there.
"""

from cpython.array cimport array
from libc.stdint cimport int64_t, uint64_t, uint8_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15ULL
cdef uint64_t TRIAL_KEY = 0x5851F42D4C957F2DULL


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def mc_accept_counts(master, Py_ssize_t trials, cut_a, cut_b_m1,
                     acc_a, acc_b, lo_k, hi_k, values):
    cdef Py_ssize_t n = len(values)
    cdef array a_lo = array("Q", lo_k)
    cdef array a_hi = array("Q", hi_k)
    cdef array a_acc_a = array("B", acc_a)
    cdef array a_acc_b = array("B", acc_b)
    cdef array a_val = array("d", values)
    cdef array a_cnt = array("q", [0] * n)
    cdef uint64_t[:] lo = a_lo
    cdef uint64_t[:] hi = a_hi
    cdef uint8_t[:] ok_a = a_acc_a
    cdef uint8_t[:] ok_b = a_acc_b
    cdef double[:] val = a_val
    cdef int64_t[:] cnt = a_cnt

    cdef uint64_t key = (<uint64_t>(master & 0xFFFFFFFFFFFFFFFF)) ^ TRIAL_KEY
    cdef uint64_t ca = <uint64_t>cut_a
    cdef uint64_t cb = <uint64_t>cut_b_m1
    cdef uint64_t seed, k1, k2
    cdef Py_ssize_t t, j
    cdef double total, s1 = 0.0, s2 = 0.0

    with nogil:
        for t in range(trials):
            seed = mix64(key + <uint64_t>(t + 1) * GAMMA)
            k1 = mix64(seed + GAMMA)
            total = 0.0
            if k1 < ca:
                for j in range(n):
                    if ok_a[j]:
                        cnt[j] += 1
                        total += val[j]
            elif k1 <= cb:
                for j in range(n):
                    if ok_b[j]:
                        cnt[j] += 1
                        total += val[j]
            else:
                k2 = mix64(seed + 2 * GAMMA)
                for j in range(n):
                    if lo[j] <= k2 and k2 <= hi[j]:
                        cnt[j] += 1
                        total += val[j]
            s1 += total
            s2 += total * total
    return list(a_cnt), s1, s2
