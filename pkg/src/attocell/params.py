"""Physical constants of the downlink and the quantities derived from them."""
from __future__ import annotations

import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """A physical parameter violates its validity constraint.

    ``field`` names the offending parameter so callers (and the CLI) can
    point at it directly.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class SystemParams:
    """Link-level constants. Angles are stored in radians.

    The defaults are the reference scenario: 8-PAM, 40 MHz modulation
    bandwidth, 1 cm^2 photodiode, 60 degree half-power semi-angle.
    """

    N_o: float = 4.14e-21          # A^2/Hz
    W: float = 40e6                # Hz
    A_pd: float = 1e-4             # m^2
    R_pd: float = 0.1              # A/W
    M: int = 8
    A: float = 1.0                 # W
    theta_f: float = math.pi / 2
    theta_h: float = math.pi / 3

    def __post_init__(self):
        validate(self)

    @classmethod
    def from_degrees(cls, theta_h_deg: float = 60.0, theta_f_deg: float = 90.0, **kwargs) -> "SystemParams":
        return cls(theta_h=math.radians(theta_h_deg), theta_f=math.radians(theta_f_deg), **kwargs)


def validate(params: SystemParams) -> None:
    for name in ("N_o", "W", "A_pd", "R_pd", "A"):
        value = getattr(params, name)
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ParameterError(name, f"must be a finite positive number, got {value!r}")
    if isinstance(params.M, bool) or not isinstance(params.M, int) or params.M < 2:
        raise ParameterError("M", f"PAM order must be an integer >= 2, got {params.M!r}")
    if not 0 < params.theta_h < math.pi / 2:
        raise ParameterError("theta_h", f"half-power semi-angle must lie in (0, pi/2) rad, got {params.theta_h!r}")
    # the gain model has no FOV cutoff, so anything narrower than a hemisphere would be silently wrong
    if not math.isclose(params.theta_f, math.pi / 2, rel_tol=0.0, abs_tol=1e-12):
        raise ParameterError("theta_f", f"only a field of view of pi/2 rad (90 deg) is supported, got {params.theta_f!r}")


@dataclass(frozen=True)
class DerivedParams:
    """Secondary constants for a given mount height ``h``.

    ``T1`` and ``T2`` are the per-interferer prefactors of the interference
    mean and variance sums; both depend on ``h``.
    """

    m: float
    beta: float
    sigma_sq: float
    P_o: float
    T1: float
    T2: float
    h: float


def lambertian_order(theta_h: float) -> float:
    return -math.log(2.0) / math.log(math.cos(theta_h))


def interference_prefactors(A: float, M: int, R_pd: float, A_pd: float, m: float, h: float) -> tuple[float, float]:
    """Return ``(T1, T2)`` for the interference mean and variance sums.

    ``T2`` carries a factor ``M**2 - 1`` (the variance of a uniformly drawn
    PAM level), so it vanishes for a single-level constellation.
    """
    hp = h ** (m + 1)
    t1 = A * M * R_pd * A_pd * (m + 1) * hp / (2 * math.pi)
    t2 = A**2 * (M**2 - 1) * R_pd**2 * A_pd**2 * (m + 1) ** 2 * hp**2 / (12 * math.pi**2)
    return t1, t2


def derive(params: SystemParams, h: float) -> DerivedParams:
    """Derive the Lambertian order, noise variance and sum prefactors.

    Parameters
    ----------
    params : SystemParams
        Validated link constants.
    h : float
        LED mount height in metres.

    Returns
    -------
    DerivedParams

    Raises
    ------
    ParameterError
        If ``h`` is not a finite positive number.
    """
    if not (math.isfinite(h) and h > 0):
        raise ParameterError("h", f"mount height must be positive, got {h!r}")
    validate(params)
    m = lambertian_order(params.theta_h)
    t1, t2 = interference_prefactors(params.A, params.M, params.R_pd, params.A_pd, m, h)
    return DerivedParams(
        m=m,
        beta=m + 3,
        sigma_sq=params.N_o * params.W,
        P_o=params.A * params.M,
        T1=t1,
        T2=t2,
        h=h,
    )
