"""Special functions used by the interference series and the error model.

Thin, domain-checked wrappers over :mod:`scipy.special`.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special

# K_nu values below this are flushed to zero; the series terms they scale are negligible.
BESSEL_FLUSH = 1e-300


def gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"gamma is only defined here for x > 0, got {x!r}")
    return float(special.gamma(x))


def bessel_k(nu, y):
    """Modified Bessel function of the second kind, real order ``nu >= 0``.

    Accepts scalars or arrays for ``y``; arrays are returned for array input.
    """
    y_arr = np.asarray(y, dtype=float)
    if not nu >= 0:
        raise ValueError(f"order must be non-negative, got {nu!r}")
    if nu < 1e-150:
        nu = 0.0  # scipy returns nan for subnormal orders; K is even in nu, so the error is O(nu^2)
    if np.any(~(y_arr > 0)):
        raise ValueError("argument must be strictly positive")
    out = special.kv(nu, y_arr)
    out = np.where(out < BESSEL_FLUSH, 0.0, out)
    if np.ndim(y) == 0:
        return float(out)
    return out


def q_func(x):
    """Gaussian tail probability ``Q(x) = P[N(0,1) > x]``."""
    out = 0.5 * special.erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))
    if np.ndim(x) == 0:
        return float(out)
    return out
