"""Grid evaluation over (h/a, K, receiver position, method) and CSV output."""
from __future__ import annotations

import csv
import dataclasses
import io
import math
import os
import tempfile
from dataclasses import dataclass, field

from .interference import SeriesOrder
from .lattice import LatticeSpec, ReceiverPos
from .link import metrics
from .mcsim import McConfig, simulate
from .params import ParameterError, SystemParams, derive

SWEEP_METHODS = ("closed-form", "exact-sum", "both")
_ROW_METHODS = {"closed-form": ("closed-form",), "exact-sum": ("exact-sum",),
                "both": ("closed-form", "exact-sum")}


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid to evaluate.

    Ratios are realized as ``a = self.a`` and ``h = ratio * a``. Positions are
    absolute ground-plane coordinates (m) relative to the tagged LED.
    """

    k_values: tuple = tuple(range(1, 16))
    ha_ratios: tuple = (3.0, 5.0, 7.0)
    positions: tuple = (ReceiverPos(),)
    method: str = "closed-form"
    order: SeriesOrder | None = None
    mc: McConfig | None = None
    a: float = 1.0

    def __post_init__(self):
        for name in ("k_values", "ha_ratios", "positions"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        for K in self.k_values:
            if isinstance(K, bool) or not isinstance(K, int) or K < 1:
                raise ValueError(f"k_values: K must be an integer >= 1, got {K!r}")
        for r in self.ha_ratios:
            if not (math.isfinite(r) and r > 0):
                raise ValueError(f"ha_ratios: ratio must be positive, got {r!r}")
        if self.method not in SWEEP_METHODS:
            raise ValueError(f"method must be one of {SWEEP_METHODS}, got {self.method!r}")
        if not (math.isfinite(self.a) and self.a > 0):
            raise ValueError(f"a must be positive, got {self.a!r}")


@dataclass(frozen=True)
class SweepRow:
    h_over_a: float
    K: int
    z_x: float
    z_y: float
    method: str
    mu: float = math.nan
    sigma1_sq: float = math.nan
    p_e: float = math.nan
    gamma: float = math.nan
    r_spectral: float = math.nan
    r_reported: float = math.nan
    goodput: float = math.nan
    mc_emp_mean: float = math.nan
    mc_emp_var: float = math.nan
    mc_emp_ser: float = math.nan
    mc_stderr_mean: float = math.nan
    mc_stderr_ser: float = math.nan
    error: str = ""


COLUMNS = tuple(f.name for f in dataclasses.fields(SweepRow))


@dataclass(frozen=True)
class KStar:
    h_over_a: float
    z_x: float
    z_y: float
    method: str
    k_star: int | None
    g_star: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    k_star: tuple = field(default=())

    @property
    def failures(self) -> tuple:
        return tuple(r for r in self.rows if r.error)


def _cell(ratio, K, pos, spec, params, dp):
    lat = LatticeSpec(a=spec.a, h=ratio * spec.a, K=K)
    mc_cols = {}
    if spec.mc is not None:
        rep = simulate(pos, lat, params, spec.mc, dp=dp)
        mc_cols = dict(mc_emp_mean=rep.emp_mean, mc_emp_var=rep.emp_var, mc_emp_ser=rep.emp_ser,
                       mc_stderr_mean=rep.stderr_mean, mc_stderr_ser=rep.stderr_ser)
    rows = []
    for method in _ROW_METHODS[spec.method]:
        lm = metrics(pos, lat, params, dp=dp, order=spec.order, method=method)
        rows.append(SweepRow(
            h_over_a=ratio, K=K, z_x=pos.z_x, z_y=pos.z_y, method=method,
            mu=lm.moments.mu, sigma1_sq=lm.moments.sigma1_sq, p_e=lm.p_e, gamma=lm.gamma,
            r_spectral=lm.r_spectral, r_reported=lm.r_reported, goodput=lm.goodput, **mc_cols,
        ))
    return rows


def run_sweep(spec: SweepSpec, params: SystemParams) -> SweepResult:
    """Evaluate every grid cell; a failing cell yields error rows, not an exception.

    Rows are ordered by (ratio, K, position index, method) in the order given
    by ``spec``. The K* summary picks, per (ratio, position, method), the
    smallest K with the largest goodput among successful rows.
    """
    rows = []
    for ratio in spec.ha_ratios:
        try:
            dp = derive(params, ratio * spec.a)
        except ParameterError as exc:
            dp, dp_err = None, str(exc)
        for K in spec.k_values:
            for pos in spec.positions:
                if dp is None:
                    err = dp_err
                else:
                    try:
                        rows.extend(_cell(ratio, K, pos, spec, params, dp))
                        continue
                    except (ValueError, ArithmeticError) as exc:
                        err = f"{type(exc).__name__}: {exc}"
                for method in _ROW_METHODS[spec.method]:
                    rows.append(SweepRow(h_over_a=ratio, K=K, z_x=pos.z_x, z_y=pos.z_y,
                                         method=method, error=err))

    summary = []
    for ratio in spec.ha_ratios:
        for pos in spec.positions:
            for method in _ROW_METHODS[spec.method]:
                best_k, best_g = None, -math.inf
                for r in rows:
                    if (r.h_over_a, r.z_x, r.z_y, r.method) == (ratio, pos.z_x, pos.z_y, method) \
                            and not r.error and r.goodput > best_g:
                        best_k, best_g = r.K, r.goodput
                summary.append(KStar(ratio, pos.z_x, pos.z_y, method, best_k,
                                     best_g if best_k is not None else math.nan))
    return SweepResult(rows=tuple(rows), k_star=tuple(summary))


def _fmt(value) -> str:
    if isinstance(value, float):
        return "" if math.isnan(value) else f"{value:.12g}"
    return str(value)


def format_csv(result: SweepResult, spec: SweepSpec, params: SystemParams) -> str:
    """Render the sweep as CSV text with ``#`` metadata lines before the header."""
    lines = ["# attocell sweep"]
    lines.append("# system: " + " ".join(
        f"{f.name}={_fmt(float(getattr(params, f.name)))}" for f in dataclasses.fields(params)))
    lines.append(f"# a={_fmt(float(spec.a))} h=" + ",".join(_fmt(float(r * spec.a)) for r in spec.ha_ratios))
    lines.append(f"# method={spec.method} order={spec.order if spec.order is not None else 'auto'}")
    if spec.mc is not None:
        mc = spec.mc
        lines.append(f"# mc: seed={mc.seed} n_slots={mc.n_slots} oracle_radius={mc.oracle_radius} "
                     f"transmit_level={mc.transmit_level} far_field_mean={mc.far_field_mean}")
    else:
        lines.append("# mc: none")
    for ks in result.k_star:
        k = "none" if ks.k_star is None else str(ks.k_star)
        lines.append(f"# k_star: h_over_a={_fmt(float(ks.h_over_a))} z_x={_fmt(float(ks.z_x))} "
                     f"z_y={_fmt(float(ks.z_y))} method={ks.method} K*={k} G*={_fmt(ks.g_star)}")
    buf = io.StringIO()
    buf.write("\n".join(lines) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in result.rows:
        writer.writerow(_fmt(getattr(row, name)) for name in COLUMNS)
    return buf.getvalue()


def write_csv(path: str, text: str) -> None:
    """Write ``text`` atomically: temp file in the target directory, then rename."""
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".attocell-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)  # mkstemp creates 0600
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
