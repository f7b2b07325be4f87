"""Monte Carlo symbol-level simulation of the M-PAM downlink.

Each slot draws an independent uniform PAM level for every interferer in the
index square ``[-R, R]^2 \\ (0, 0)`` (``R = oracle_radius``), a level for the
tagged LED and Gaussian receiver noise, then detects with midpoint thresholds
on the noiseless constellation ``(2l - 1) * A * G00 * R_pd``. Interference
current uses no mean cancellation.

Randomness
----------
Interferer levels come from a counter-based splitmix64 stream keyed by
``SeedSequence(seed)`` (see ``attocell._kernels``). Tagged levels and noise
use ``numpy.random.default_rng([seed, chunk])`` per fixed-size chunk of slots.
Both depend only on the absolute slot index, so results do not depend on how
the slot range is partitioned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .lattice import LatticeSpec, ReceiverPos, check_in_cell, exact_moments
from .params import DerivedParams, SystemParams, derive

CHUNK_SLOTS = 1 << 16


@dataclass(frozen=True)
class McConfig:
    """Monte Carlo run settings.

    ``transmit_level`` is a tagged-LED level index in ``1..M`` or ``"uniform"``.
    ``far_field_mean`` adds the deterministic mean current of interferers
    outside the simulated square (their variance is negligible); it has no
    effect when ``oracle_radius == 0``.
    """

    n_slots: int
    seed: int = 0
    oracle_radius: int = 50
    transmit_level: int | str = "uniform"
    far_field_mean: bool = True

    def __post_init__(self):
        if isinstance(self.n_slots, bool) or not isinstance(self.n_slots, int) or self.n_slots < 1:
            raise ValueError(f"n_slots must be a positive integer, got {self.n_slots!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if isinstance(self.oracle_radius, bool) or not isinstance(self.oracle_radius, int) or self.oracle_radius < 0:
            raise ValueError(f"oracle_radius must be a non-negative integer, got {self.oracle_radius!r}")
        lvl = self.transmit_level
        if lvl != "uniform" and (isinstance(lvl, bool) or not isinstance(lvl, int) or lvl < 1):
            raise ValueError(f"transmit_level must be 'uniform' or a level index >= 1, got {lvl!r}")


@dataclass(frozen=True)
class McReport:
    emp_mean: float
    emp_var: float
    emp_ser: float
    stderr_mean: float
    stderr_ser: float
    stderr_var: float
    n_slots: int


def interferer_coefficients(pos: ReceiverPos, spec: LatticeSpec, params: SystemParams,
                            dp: DerivedParams, radius: int) -> np.ndarray:
    """Current per unit PAM level (A * G_ij * R_pd) for each interferer, row-major in (i, j)."""
    idx = np.arange(-radius, radius + 1, dtype=float)
    dx = pos.z_x + idx[:, None] * spec.spacing
    dy = pos.z_y + idx[None, :] * spec.spacing
    x = (dx * dx + dy * dy + spec.h**2).ravel()
    x = np.delete(x, x.size // 2)  # tagged LED
    gain0 = (dp.m + 1) * params.A_pd * spec.h ** (dp.m + 1) / (2 * math.pi)
    return params.A * params.R_pd * gain0 * x ** (-dp.beta / 2)


def stream_key(seed: int) -> int:
    return int(np.random.SeedSequence(seed).generate_state(1, dtype=np.uint64)[0])


def simulate(pos: ReceiverPos, spec: LatticeSpec, params: SystemParams, mc: McConfig,
             dp: DerivedParams | None = None) -> McReport:
    """Simulate ``mc.n_slots`` symbols and return empirical moments and SER.

    ``emp_mean``/``emp_var`` describe the total interference current; the
    standard errors are the usual large-sample ones (``stderr_var`` uses the
    sample fourth central moment).
    """
    check_in_cell(pos, spec)
    if dp is None:
        dp = derive(params, spec.h)
    M = params.M
    if mc.transmit_level != "uniform" and mc.transmit_level > M:
        raise ValueError(f"transmit_level must be in 1..{M}, got {mc.transmit_level}")

    c0 = params.A * params.R_pd * (dp.m + 1) * params.A_pd / (2 * math.pi) * spec.h ** (dp.m + 1) \
        * (pos.z_x**2 + pos.z_y**2 + spec.h**2) ** (-dp.beta / 2)
    coef = interferer_coefficients(pos, spec, params, dp, mc.oracle_radius)
    far = 0.0
    if mc.far_field_mean and coef.size:
        far = exact_moments(pos, spec, params, dp).mu - M * math.fsum(coef)
    key = stream_key(mc.seed)
    sigma = math.sqrt(dp.sigma_sq)
    shift = M * math.fsum(coef) + far  # analytic mean; keeps power sums well conditioned

    p1 = p2 = p3 = p4 = 0.0
    errors = 0
    for chunk, start in enumerate(range(0, mc.n_slots, CHUNK_SLOTS)):
        n = min(CHUNK_SLOTS, mc.n_slots - start)
        if coef.size:
            interf = _kernels.interference_draws(coef, key, start, n, M) + far
        else:
            interf = np.zeros(n)
        rng = np.random.default_rng([mc.seed, chunk])
        if mc.transmit_level == "uniform":
            lvl = rng.integers(1, M + 1, size=n)
        else:
            lvl = np.full(n, mc.transmit_level)
        noise = rng.normal(0.0, sigma, size=n)
        received = (2 * lvl - 1) * c0 + interf + noise
        detected = np.clip(np.floor(received / (2 * c0)) + 1, 1, M)
        errors += int(np.count_nonzero(detected != lvl))
        dev = interf - shift
        dev2 = dev * dev
        p1 += float(dev.sum())
        p2 += float(dev2.sum())
        p3 += float((dev2 * dev).sum())
        p4 += float((dev2 * dev2).sum())

    n = mc.n_slots
    m1 = p1 / n
    mean = shift + m1
    var_biased = max(p2 / n - m1 * m1, 0.0)
    var = var_biased * n / (n - 1) if n > 1 else 0.0
    m4 = p4 / n - 4 * m1 * p3 / n + 6 * m1 * m1 * p2 / n - 3 * m1**4
    ser = errors / n
    return McReport(
        emp_mean=mean,
        emp_var=var,
        emp_ser=ser,
        stderr_mean=math.sqrt(var / n),
        stderr_ser=math.sqrt(ser * (1 - ser) / n),
        stderr_var=math.sqrt(max(m4 - var_biased**2, 0.0) / n),
        n_slots=n,
    )
