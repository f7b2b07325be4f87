"""Link-level metrics: M-PAM error probability, SINR, rate, goodput, optimum K."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .interference import InterferenceMoments, SeriesOrder, moments as compute_moments
from .lattice import DEFAULT_RADIUS, LatticeSpec, LedIndex, ReceiverPos, channel_gain
from .params import DerivedParams, SystemParams, derive
from .specfun import q_func


@dataclass(frozen=True)
class LinkMetrics:
    """Per-position link figures for one TDMA factor ``K``.

    ``r_spectral`` is in bit/s/Hz and already includes the 1/K**2 time share;
    ``r_reported = W * r_spectral`` is in bit/s. ``d`` is the optical distance
    between adjacent constellation points (W).
    """

    p_e: float
    gamma: float
    r_spectral: float
    r_reported: float
    goodput: float
    d: float
    moments: InterferenceMoments


@dataclass(frozen=True)
class OptResult:
    k_star: int
    g_star: float
    trace: tuple  # ((K, LinkMetrics), ...) in ascending K


def constellation_distance(pos: ReceiverPos, spec: LatticeSpec, params: SystemParams,
                           dp: DerivedParams) -> float:
    return 2 * params.A * channel_gain(LedIndex(0, 0), pos, spec, dp, params.A_pd)


def error_probability(moments: InterferenceMoments, d: float, params: SystemParams,
                      dp: DerivedParams | None = None) -> float:
    """Union bound on the M-PAM symbol error probability, clamped to 1.

    The interference mean is left in the decision statistic (no cancellation),
    so it shifts the Gaussian tail argument.
    """
    if not d > 0:
        raise ValueError(f"constellation distance must be positive, got {d!r}")
    sigma_sq = dp.sigma_sq if dp is not None else params.N_o * params.W
    arg = (params.R_pd * d / 2 - moments.mu) / math.sqrt(sigma_sq + moments.sigma1_sq)
    return min(1.0, 2 * (params.M - 1) / params.M * float(q_func(arg)))


def sinr(pos: ReceiverPos, spec: LatticeSpec, params: SystemParams, dp: DerivedParams,
         moments: InterferenceMoments) -> float:
    """Electrical SINR: tagged signal power over interference variance plus noise."""
    signal = dp.T1**2 * (pos.z_x**2 + pos.z_y**2 + spec.h**2) ** (-dp.beta)
    return signal / (moments.sigma1_sq + dp.sigma_sq)


def metrics(pos: ReceiverPos, spec: LatticeSpec, params: SystemParams,
            dp: DerivedParams | None = None, order: SeriesOrder | None = None,
            method: str = "closed-form", N: int = DEFAULT_RADIUS) -> LinkMetrics:
    """Evaluate every link figure at ``pos`` for the TDMA factor in ``spec``.

    Parameters
    ----------
    pos : ReceiverPos
        Must lie in the tagged attocell of the thinned lattice.
    spec : LatticeSpec
    params : SystemParams
    dp : DerivedParams, optional
        Derived constants for ``spec.h``.
    order : SeriesOrder, optional
        Closed-form truncation; ``None`` chooses it automatically.
    method : {"closed-form", "exact-sum"}
    N : int
        Truncation radius for ``"exact-sum"``.
    """
    if dp is None:
        dp = derive(params, spec.h)
    mom = compute_moments(pos, spec, params, method=method, dp=dp, order=order, N=N)
    d = constellation_distance(pos, spec, params, dp)
    p_e = error_probability(mom, d, params, dp)
    g = sinr(pos, spec, params, dp, mom)
    r_spectral = math.log2(1 + g) / spec.K**2
    r_reported = params.W * r_spectral
    return LinkMetrics(
        p_e=p_e,
        gamma=g,
        r_spectral=r_spectral,
        r_reported=r_reported,
        goodput=r_reported * (1 - p_e),
        d=d,
        moments=mom,
    )


def optimize_k(pos: ReceiverPos, template: LatticeSpec, params: SystemParams,
               k_range: tuple[int, int] = (1, 15), order: SeriesOrder | None = None,
               method: str = "closed-form", dp: DerivedParams | None = None) -> OptResult:
    """Exhaustive search for the goodput-maximizing TDMA factor.

    ``template`` supplies ``a`` and ``h``; its ``K`` is ignored. Ties go to
    the smallest K.
    """
    k_min, k_max = k_range
    if k_min < 1 or k_max < k_min:
        raise ValueError(f"empty or invalid K range [{k_min}, {k_max}]")
    if dp is None:
        dp = derive(params, template.h)
    trace = []
    best_k, best_g = None, -math.inf
    for K in range(k_min, k_max + 1):
        lm = metrics(pos, replace(template, K=K), params, dp=dp, order=order, method=method)
        trace.append((K, lm))
        if lm.goodput > best_g:
            best_k, best_g = K, lm.goodput
    return OptResult(k_star=best_k, g_star=best_g, trace=tuple(trace))
