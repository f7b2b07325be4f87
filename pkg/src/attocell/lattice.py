"""Square LED lattice geometry, line-of-sight gain and brute-force moment sums."""
from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import integrate

from . import _kernels
from .params import DerivedParams, SystemParams, derive

DEFAULT_RADIUS = 1000


class OutOfCellError(ValueError):
    """The receiver lies outside the attocell of the tagged (origin) LED."""


@dataclass(frozen=True)
class ReceiverPos:
    """Photodiode location on the ground plane, metres from below the tagged LED."""

    z_x: float = 0.0
    z_y: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.z_x) and math.isfinite(self.z_y)):
            raise ValueError(f"receiver coordinates must be finite, got ({self.z_x!r}, {self.z_y!r})")

    @property
    def z(self) -> float:
        return math.hypot(self.z_x, self.z_y)


@dataclass(frozen=True)
class LatticeSpec:
    """LED spacing ``a``, mount height ``h`` and TDMA factor ``K``.

    Only every K-th LED along each axis transmits in a given slot, so the
    active lattice has spacing ``K * a``.
    """

    a: float
    h: float
    K: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"a: LED spacing must be positive, got {self.a!r}")
        if not (math.isfinite(self.h) and self.h > 0):
            raise ValueError(f"h: mount height must be positive, got {self.h!r}")
        if isinstance(self.K, bool) or not isinstance(self.K, int) or self.K < 1:
            raise ValueError(f"K: TDMA factor must be an integer >= 1, got {self.K!r}")

    @property
    def spacing(self) -> float:
        return self.K * self.a

    @classmethod
    def from_ratio(cls, h_over_a: float, K: int = 1, a: float = 1.0) -> "LatticeSpec":
        return cls(a=a, h=h_over_a * a, K=K)


@dataclass(frozen=True)
class LedIndex:
    i: int
    j: int


def check_in_cell(pos: ReceiverPos, spec: LatticeSpec) -> None:
    half = spec.spacing / 2
    if abs(pos.z_x) > half or abs(pos.z_y) > half:
        raise OutOfCellError(
            f"receiver ({pos.z_x:g}, {pos.z_y:g}) lies outside the tagged attocell "
            f"|z_x|, |z_y| <= {half:g} (K*a/2)"
        )


def horizontal_distance(idx: LedIndex, pos: ReceiverPos, spacing: float) -> float:
    return math.hypot(pos.z_x + idx.i * spacing, pos.z_y + idx.j * spacing)


def gain_at_distance(D: float, h: float, m: float, A_pd: float) -> float:
    return (m + 1) * A_pd * h ** (m + 1) / (2 * math.pi) * (D * D + h * h) ** (-(m + 3) / 2)


def channel_gain(idx: LedIndex, pos: ReceiverPos, spec: LatticeSpec, dp: DerivedParams, A_pd: float) -> float:
    """Optical power gain from LED ``idx`` of the active lattice to the receiver."""
    D = horizontal_distance(idx, pos, spec.spacing)
    return gain_at_distance(D, spec.h, dp.m, A_pd)


def interferer_mean_current(idx: LedIndex, pos: ReceiverPos, spec: LatticeSpec,
                            params: SystemParams, dp: DerivedParams) -> float:
    """Mean photocurrent contributed by one interferer (average power ``A*M``)."""
    return params.A * params.M * channel_gain(idx, pos, spec, dp, params.A_pd) * params.R_pd


def _complement_integral(zx: float, zy: float, half_width: float, h: float, s: float) -> float:
    # Integral of (r^2 + h^2)^-s over the plane outside the square
    # [zx - L, zx + L] x [zy - L, zy + L], in polar coordinates about the origin.
    def boundary(theta):
        c, sn = math.cos(theta), math.sin(theta)
        tx = (zx + half_width) / c if c > 0 else ((zx - half_width) / c if c < 0 else math.inf)
        ty = (zy + half_width) / sn if sn > 0 else ((zy - half_width) / sn if sn < 0 else math.inf)
        return min(tx, ty)

    def integrand(theta):
        rho = boundary(theta)
        return (rho * rho + h * h) ** (1.0 - s) / (2.0 * (s - 1.0))

    corners = sorted(
        math.atan2(y, x) % (2 * math.pi)
        for x in (zx - half_width, zx + half_width)
        for y in (zy - half_width, zy + half_width)
    )
    edges = [0.0, *corners, 2 * math.pi]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi > lo:
            total += integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    return total


def lattice_sums(pos: ReceiverPos, spacing: float, h: float, s: float,
                 n: int = DEFAULT_RADIUS, tail_correction: bool = True) -> tuple[float, float]:
    """Return ``(sum x**-s, sum x**-2s)`` over interferers, ``x = D**2 + h**2``.

    Sums over the index square ``[-n, n]^2`` minus the origin. With
    ``tail_correction`` the continuum integral over the plane outside the
    square of cells (half-width ``(n + 1/2) * spacing``) is added, which
    turns the O(n^-2) truncation error into O(n^-4).
    """
    if n < 0:
        raise ValueError(f"truncation radius must be >= 0, got {n}")
    rows1, rows2 = _kernels.lattice_row_sums(pos.z_x, pos.z_y, spacing, h, s, n)
    s1 = math.fsum(rows1)
    s2 = math.fsum(rows2)
    if tail_correction and n > 0:
        L = (n + 0.5) * spacing
        s1 += _complement_integral(pos.z_x, pos.z_y, L, h, s) / spacing**2
        s2 += _complement_integral(pos.z_x, pos.z_y, L, h, 2 * s) / spacing**2
    return s1, s2


def exact_moments(pos: ReceiverPos, spec: LatticeSpec, params: SystemParams,
                  dp: DerivedParams | None = None, N: int = DEFAULT_RADIUS,
                  tail_correction: bool = True):
    """Interference mean and variance by direct summation over the active lattice.

    Parameters
    ----------
    pos : ReceiverPos
        Receiver location; must lie inside the tagged attocell.
    spec : LatticeSpec
        Geometry; interferers sit on the lattice of spacing ``K * a``.
    params : SystemParams
    dp : DerivedParams, optional
        Derived constants for ``spec.h``; computed when omitted.
    N : int
        Chebyshev radius of the summed index square.
    tail_correction : bool
        Add the continuum estimate of the terms beyond ``N``.

    Returns
    -------
    InterferenceMoments
        ``method == "exact-sum"``.
    """
    from .interference import InterferenceMoments

    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    check_in_cell(pos, spec)
    if dp is None:
        dp = derive(params, spec.h)
    s1, s2 = lattice_sums(pos, spec.spacing, spec.h, dp.beta / 2, N, tail_correction)
    return InterferenceMoments(mu=dp.T1 * s1, sigma1_sq=dp.T2 * s2, method="exact-sum")
