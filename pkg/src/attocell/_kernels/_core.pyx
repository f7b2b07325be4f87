# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: lattice row sums and Monte Carlo interference draws.

Both routines must round exactly like their numpy twins in ``_fallback.py``;
keep the operation order in sync when editing either file.
"""
from cython.parallel cimport parallel, prange
from libc.math cimport pow
from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport abort, free, malloc

import numpy as np

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL


cdef inline uint64_t _mix(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline double _ipow_neg(double x, int p) noexcept nogil:
    cdef double acc = 1.0
    cdef int k
    for k in range(p):
        acc = acc * x
    return 1.0 / acc


def lattice_row_sums(double zx, double zy, double spacing, double h, double s,
                     int64_t n, int nthreads=1):
    """Per-row partial sums of x**-s and x**-2s, x = |p_ij - z|^2 + h^2.

    Rows are indexed by i in [-n, n]; the (0, 0) term is skipped.
    Returns two float64 arrays of length 2n+1.
    """
    cdef int64_t rows = 2 * n + 1
    out1_arr = np.zeros(rows, dtype=np.float64)
    out2_arr = np.zeros(rows, dtype=np.float64)
    cdef double[::1] out1 = out1_arr
    cdef double[::1] out2 = out2_arr
    cdef int64_t r, j
    cdef double dx, dy, x, t, acc1, acc2, hh = h * h
    cdef int p = <int>s
    cdef bint integral = (<double>p == s) and p <= 64
    if nthreads < 1:
        nthreads = 1
    for r in prange(rows, nogil=True, schedule="static", num_threads=nthreads):
        dx = zx + (r - n) * spacing
        acc1 = 0.0
        acc2 = 0.0
        for j in range(rows):
            if r == n and j == n:
                continue
            dy = zy + (j - n) * spacing
            x = dx * dx + dy * dy + hh
            if integral:
                t = _ipow_neg(x, p)
            else:
                t = pow(x, -s)
            acc1 = acc1 + t
            acc2 = acc2 + t * t
        out1[r] = acc1
        out2[r] = acc2
    return out1_arr, out2_arr


def interference_draws(const double[::1] coef, uint64_t key, int64_t slot0,
                       int64_t n_slots, int M, int nthreads=1):
    """Sum of uniformly drawn PAM levels times per-interferer coefficients.

    out[t] = sum_j (2*l_tj + 1) * coef[j], with l_tj uniform in {0..M-1}
    drawn from a counter-based splitmix64 stream keyed by ``key``.
    Slot t draws words at counters (slot0 + t) * words_per_slot + w + 1,
    so any partition of the slot range gives identical values.
    Accumulation uses four lanes (j mod 4) combined as (l0 + l1) + (l2 + l3).
    """
    cdef int64_t n_int = coef.shape[0]
    cdef int bits = 0
    cdef int per_word
    cdef bint pow2 = (M & (M - 1)) == 0
    cdef uint64_t mask
    if pow2:
        while (1 << bits) < M:
            bits += 1
        per_word = 64 // bits
        mask = <uint64_t>(M - 1)
    else:
        bits = 32
        per_word = 2
        mask = 0xFFFFFFFFULL
    cdef int64_t words = (n_int + per_word - 1) // per_word
    out_arr = np.empty(n_slots, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int64_t t, w, j, jend, k
    cdef uint64_t word, counter, idx
    cdef double a0, a1, a2, a3
    cdef double *lev
    if nthreads < 1:
        nthreads = 1
    with nogil, parallel(num_threads=nthreads):
        lev = <double *> malloc((n_int + 4) * sizeof(double))
        if lev == NULL:
            abort()
        for t in prange(n_slots, schedule="static"):
            j = 0
            for w in range(words):
                counter = <uint64_t>((slot0 + t) * words + w + 1)
                word = _mix(key + counter * GOLDEN)
                jend = j + per_word
                if jend > n_int:
                    jend = n_int
                if pow2:
                    while j < jend:
                        lev[j] = <double><int64_t>(2 * (word & mask) + 1)
                        word = word >> bits
                        j = j + 1
                else:
                    while j < jend:
                        idx = ((word & mask) * <uint64_t>M) >> 32
                        lev[j] = <double><int64_t>(2 * idx + 1)
                        word = word >> bits
                        j = j + 1
            a0 = 0.0
            a1 = 0.0
            a2 = 0.0
            a3 = 0.0
            k = 0
            while k + 4 <= n_int:
                a0 = a0 + lev[k] * coef[k]
                a1 = a1 + lev[k + 1] * coef[k + 1]
                a2 = a2 + lev[k + 2] * coef[k + 2]
                a3 = a3 + lev[k + 3] * coef[k + 3]
                k = k + 4
            if k < n_int:
                a0 = a0 + lev[k] * coef[k]
            if k + 1 < n_int:
                a1 = a1 + lev[k + 1] * coef[k + 1]
            if k + 2 < n_int:
                a2 = a2 + lev[k + 2] * coef[k + 2]
            out[t] = (a0 + a1) + (a2 + a3)
        free(lev)
    return out_arr
