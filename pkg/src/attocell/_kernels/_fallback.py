"""Numpy implementations of the compiled kernels.

Bit-compatible with ``_core.pyx``: same counters, same hash, same
accumulation lanes and the same lane-combination order.
"""
from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_C1 = np.uint64(0xBF58476D1CE4E5B9)
_C2 = np.uint64(0x94D049BB133111EB)
_ROW_CHUNK = 64
_SLOT_CHUNK = 1 << 16


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _C1
    z = (z ^ (z >> np.uint64(27))) * _C2
    return z ^ (z >> np.uint64(31))


def lattice_row_sums(zx, zy, spacing, h, s, n, nthreads=1):
    # integer s: same rounding as the compiled loop (repeated products, left-to-right row sums);
    # non-integer s goes through pow and may differ in the last bit
    rows = 2 * n + 1
    out1 = np.zeros(rows)
    out2 = np.zeros(rows)
    offs = (np.arange(rows) - n) * spacing
    dy2 = (zy + offs) ** 2
    integral = float(s).is_integer() and s <= 64
    for start in range(0, rows, _ROW_CHUNK):
        stop = min(rows, start + _ROW_CHUNK)
        dx2 = (zx + offs[start:stop]) ** 2
        x = dx2[:, None] + dy2[None, :] + h * h
        if integral:
            acc = x.copy()
            for _ in range(int(s) - 1):
                acc *= x
            t = 1.0 / acc
        else:
            t = x ** (-s)
        if start <= n < stop:
            t[n - start, n] = 0.0
        out1[start:stop] = np.cumsum(t, axis=1)[:, -1]
        out2[start:stop] = np.cumsum(t * t, axis=1)[:, -1]
    return out1, out2


def interference_draws(coef, key, slot0, n_slots, M, nthreads=1):
    coef = np.ascontiguousarray(coef, dtype=np.float64)
    n_int = coef.shape[0]
    pow2 = (M & (M - 1)) == 0
    if pow2:
        bits = max(1, int(M - 1).bit_length())
        per_word = 64 // bits
        mask = np.uint64(M - 1)
    else:
        bits = 32
        per_word = 2
        mask = np.uint64(0xFFFFFFFF)
    words = -(-n_int // per_word)
    key = np.uint64(key)
    out = np.empty(n_slots)
    with np.errstate(over="ignore"):
        for start in range(0, n_slots, _SLOT_CHUNK):
            stop = min(n_slots, start + _SLOT_CHUNK)
            base = (np.arange(start, stop, dtype=np.uint64) + np.uint64(slot0)) * np.uint64(words)
            lanes = [np.zeros(stop - start) for _ in range(4)]
            for w in range(words):
                word = _mix(key + (base + np.uint64(w + 1)) * GOLDEN)
                j0 = w * per_word
                for j in range(j0, min(j0 + per_word, n_int)):
                    if pow2:
                        idx = word & mask
                    else:
                        idx = ((word & mask) * np.uint64(M)) >> np.uint64(32)
                    word = word >> np.uint64(bits)
                    lev = (2 * idx + 1).astype(np.float64)
                    lanes[j & 3] += lev * coef[j]
            out[start:stop] = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3])
    return out
