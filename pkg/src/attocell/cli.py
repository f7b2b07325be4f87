"""Command-line front end: ``attocell {metrics,sweep,optimize,validate}``.

Exit status: 0 success, 1 domain or runtime failure, 2 usage error
(bad flags, malformed or unknown config entries).
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
from dataclasses import dataclass

from . import _kernels
from .interference import SeriesOrder
from .lattice import LatticeSpec, ReceiverPos, exact_moments
from .link import metrics, optimize_k
from .mcsim import McConfig, simulate
from .params import SystemParams
from .sweep import SWEEP_METHODS, SweepSpec, format_csv, run_sweep, write_csv

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

# config keys -> SystemParams fields; angles are given in degrees
_SYSTEM_KEYS = {"N_o": "N_o", "W": "W", "A_pd": "A_pd", "R_pd": "R_pd", "M": "M", "A": "A",
                "theta_h_deg": "theta_h", "theta_f_deg": "theta_f"}
_IGNORED_SYSTEM_KEYS = {"T"}  # temperature: accepted, never used
_SWEEP_KEYS = {"k_values", "ha_ratios", "positions", "method", "order", "a",
               "with_mc", "n_slots", "seed", "oracle_radius"}
_OUTPUT_KEYS = {"path", "format", "plot_format"}


class UsageError(Exception):
    """Bad command line or config; maps to exit status 2."""


@dataclass(frozen=True)
class RunConfig:
    system: dict
    sweep: dict
    output: dict


# -- value parsers (shared by flags and config) --------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text!r}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {value}")
    return value


def parse_k_values(text: str) -> tuple:
    """``"1..15"`` (inclusive range) or a comma list ``"1,3,5"``."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (int(t) for t in text.split("..", 1))
            values = tuple(range(lo, hi + 1))
        else:
            values = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad K list {text!r}; use 'lo..hi' or 'k1,k2,...'") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError(f"K values must be non-empty integers >= 1, got {text!r}")
    return values


def parse_ratios(text: str) -> tuple:
    try:
        values = tuple(_positive_float(t) for t in text.split(",") if t.strip())
    except argparse.ArgumentTypeError as exc:
        raise argparse.ArgumentTypeError(f"bad h/a list {text!r}: {exc}") from None
    if not values:
        raise argparse.ArgumentTypeError(f"empty h/a list {text!r}")
    return values


def parse_positions(text: str) -> tuple:
    """``"zx,zy; zx,zy"`` in metres."""
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        parts = chunk.split(",")
        try:
            zx, zy = (float(p) for p in parts)
            out.append(ReceiverPos(zx, zy))
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad position {chunk.strip()!r}; use 'zx,zy'") from None
    if not out:
        raise argparse.ArgumentTypeError(f"no positions in {text!r}")
    return tuple(out)


def parse_order(text: str):
    """``"auto"`` or ``"u,v"``."""
    if text.strip().lower() == "auto":
        return None
    try:
        u, v = (int(t) for t in text.split(","))
        return SeriesOrder(u, v)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad series order {text!r}; use 'auto' or 'u,v'") from None


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "yes", "true", "on"):
        return True
    if low in ("0", "no", "false", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {text!r}")


# -- config file ----------------------------------------------------------------

def load_config(path: str) -> RunConfig:
    """Read an INI-style run manifest with [system], [sweep] and [output] sections.

    Unknown sections or keys, malformed syntax and unparsable values raise
    ``UsageError``. Keys are case-sensitive.
    """
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path!r}: {exc.strerror}") from None
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise UsageError(f"malformed config {path!r}: {exc}") from None

    allowed = {"system": set(_SYSTEM_KEYS) | _IGNORED_SYSTEM_KEYS, "sweep": _SWEEP_KEYS, "output": _OUTPUT_KEYS}
    for section in cp.sections():
        if section not in allowed:
            raise UsageError(f"config {path!r}: unknown section [{section}]")
        for key in cp[section]:
            if key not in allowed[section]:
                raise UsageError(f"config {path!r}: unknown key {key!r} in [{section}]")

    def get(section, key, conv):
        try:
            return conv(cp[section][key])
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"config {path!r}: [{section}] {key}: {exc}") from None

    system = {}
    if cp.has_section("system"):
        for key, name in _SYSTEM_KEYS.items():
            if key in cp["system"]:
                system[name] = get("system", key, int if name == "M" else float)
    sweep_convs = {"k_values": parse_k_values, "ha_ratios": parse_ratios, "positions": parse_positions,
                   "method": _choice(SWEEP_METHODS), "order": parse_order, "a": _positive_float,
                   "with_mc": _parse_bool, "n_slots": _positive_int, "seed": _seed,
                   "oracle_radius": _nonneg_int}
    sweep = {k: get("sweep", k, conv) for k, conv in sweep_convs.items()
             if cp.has_section("sweep") and k in cp["sweep"]}
    out_convs = {"path": str, "format": _choice(("csv", "csv+plot")), "plot_format": _choice(("svg", "gnuplot"))}
    output = {k: get("output", k, conv) for k, conv in out_convs.items()
              if cp.has_section("output") and k in cp["output"]}
    return RunConfig(system=system, sweep=sweep, output=output)


def _choice(options):
    def conv(text):
        text = text.strip()
        if text not in options:
            raise argparse.ArgumentTypeError(f"expected one of {', '.join(options)}, got {text!r}")
        return text
    return conv


def build_params(cfg_system: dict, args) -> SystemParams:
    """Defaults, then config values, then command-line overrides."""
    values = dict(cfg_system)
    for flag, name in (("N_o", "N_o"), ("W", "W"), ("A_pd", "A_pd"), ("R_pd", "R_pd"), ("M", "M"), ("A", "A")):
        val = getattr(args, flag, None)
        if val is not None:
            values[name] = val
    if getattr(args, "theta_h", None) is not None:
        values["theta_h"] = args.theta_h
    if getattr(args, "theta_f", None) is not None:
        values["theta_f"] = args.theta_f
    theta_h = values.pop("theta_h", 60.0)
    theta_f = values.pop("theta_f", 90.0)
    return SystemParams.from_degrees(theta_h_deg=theta_h, theta_f_deg=theta_f, **values)


# -- argument parser ----------------------------------------------------------

def _add_system_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("system parameters (override config and defaults)")
    g.add_argument("--config", metavar="FILE", help="INI run manifest with [system], [sweep], [output]")
    g.add_argument("--N-o", dest="N_o", type=_positive_float, metavar="A2/Hz", help="noise PSD")
    g.add_argument("--W", dest="W", type=_positive_float, metavar="HZ", help="modulation bandwidth")
    g.add_argument("--A-pd", dest="A_pd", type=_positive_float, metavar="M2", help="photodiode area")
    g.add_argument("--R-pd", dest="R_pd", type=_positive_float, metavar="A/W", help="responsivity")
    g.add_argument("--M", dest="M", type=_positive_int, help="PAM order (>= 2)")
    g.add_argument("--A", dest="A", type=_positive_float, metavar="W", help="optical power constant")
    g.add_argument("--theta-h", dest="theta_h", type=float, metavar="DEG", help="half-power semi-angle")
    g.add_argument("--theta-f", dest="theta_f", type=float, metavar="DEG", help="field of view (90 only)")


def _add_point_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--h-over-a", type=_positive_float, default=3.0, help="mount height / LED spacing (default 3)")
    p.add_argument("--a", type=_positive_float, default=1.0, help="LED spacing in m (default 1)")
    p.add_argument("--zx", type=float, default=0.0, help="receiver x offset in m")
    p.add_argument("--zy", type=float, default=0.0, help="receiver y offset in m")
    p.add_argument("--method", choices=("closed-form", "exact-sum"), default="closed-form")
    p.add_argument("--order", type=parse_order, default=None, metavar="auto|U,V",
                   help="closed-form series order (default auto)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="attocell",
        description="Interference, error probability, rate and goodput of a square-lattice LED downlink under TDMA.",
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("metrics", help="link metrics at one (h/a, K, position)")
    _add_point_flags(p)
    p.add_argument("--k", type=_positive_int, default=1, help="TDMA factor K (default 1)")
    _add_system_flags(p)

    p = sub.add_parser("sweep", help="grid over K, h/a and position; writes CSV")
    p.add_argument("--k-range", type=parse_k_values, help="'lo..hi' or 'k1,k2,...' (default 1..15)")
    p.add_argument("--ratios", type=parse_ratios, help="comma list of h/a (default 3,5,7)")
    p.add_argument("--positions", type=parse_positions, help="'zx,zy; zx,zy' in m (default 0,0)")
    p.add_argument("--method", choices=SWEEP_METHODS)
    p.add_argument("--order", type=parse_order, metavar="auto|U,V")
    p.add_argument("--a", type=_positive_float, help="LED spacing in m (default 1)")
    p.add_argument("--with-mc", action="store_true", default=None, help="add Monte Carlo columns")
    p.add_argument("--n-slots", type=_positive_int, help="Monte Carlo slots per cell (default 100000)")
    p.add_argument("--seed", type=_seed, help="Monte Carlo seed (default 0)")
    p.add_argument("--oracle-radius", type=_nonneg_int, help="Monte Carlo interferer radius (default 50)")
    p.add_argument("-o", "--output", help="CSV path (default sweep.csv)")
    p.add_argument("--format", choices=("csv", "csv+plot"))
    p.add_argument("--plot-format", choices=("svg", "gnuplot"))
    _add_system_flags(p)

    p = sub.add_parser("optimize", help="goodput-maximizing K by exhaustive search")
    _add_point_flags(p)
    p.add_argument("--k-min", type=_positive_int, default=1)
    p.add_argument("--k-max", type=_positive_int, default=15)
    _add_system_flags(p)

    p = sub.add_parser("validate", help="closed form vs exact sum, and Monte Carlo checks")
    p.add_argument("--n-slots", type=_positive_int, default=200_000, help="Monte Carlo slots per check")
    p.add_argument("--seed", type=_seed, default=0)
    _add_system_flags(p)
    return parser


# -- commands -------------------------------------------------------------------

_LINK_FIELDS = ("p_e", "gamma", "r_spectral", "r_reported", "goodput", "d")


def _print_table(header, rows, out):
    cols = [header] + [[f"{v:.9g}" if isinstance(v, float) else str(v) for v in r] for r in rows]
    widths = [max(len(r[i]) for r in cols) for i in range(len(header))]
    for r in cols:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


def cmd_metrics(args, cfg, out) -> int:
    params = build_params(cfg.system, args)
    spec = LatticeSpec(a=args.a, h=args.h_over_a * args.a, K=args.k)
    lm = metrics(ReceiverPos(args.zx, args.zy), spec, params, order=args.order, method=args.method)
    values = tuple(getattr(lm, f) for f in _LINK_FIELDS) + (lm.moments.mu, lm.moments.sigma1_sq)
    _print_table(("h_over_a", "K", "method") + _LINK_FIELDS + ("mu", "sigma1_sq"),
                 [(args.h_over_a, args.k, args.method) + values], out)
    return EXIT_OK


def cmd_optimize(args, cfg, out) -> int:
    if args.k_min > args.k_max:
        raise UsageError(f"--k-min ({args.k_min}) exceeds --k-max ({args.k_max})")
    params = build_params(cfg.system, args)
    template = LatticeSpec(a=args.a, h=args.h_over_a * args.a, K=1)
    res = optimize_k(ReceiverPos(args.zx, args.zy), template, params, (args.k_min, args.k_max),
                     order=args.order, method=args.method)
    print(f"K* = {res.k_star}", file=out)
    print(f"G* = {res.g_star:.9g} bit/s", file=out)
    _print_table(("K", "p_e", "r_reported", "goodput"),
                 [(K, lm.p_e, lm.r_reported, lm.goodput) for K, lm in res.trace], out)
    return EXIT_OK


def _sweep_spec(args, cfg) -> SweepSpec:
    s = dict(cfg.sweep)
    for flag, key in (("k_range", "k_values"), ("ratios", "ha_ratios"), ("positions", "positions"),
                      ("method", "method"), ("a", "a"), ("with_mc", "with_mc"), ("n_slots", "n_slots"),
                      ("seed", "seed"), ("oracle_radius", "oracle_radius")):
        val = getattr(args, flag)
        if val is not None:
            s[key] = val
    if args.order is not None or "order" not in s:
        s["order"] = args.order
    mc = None
    if s.get("with_mc"):
        mc = McConfig(n_slots=s.get("n_slots", 100_000), seed=s.get("seed", 0),
                      oracle_radius=s.get("oracle_radius", 50))
    kwargs = {k: s[k] for k in ("k_values", "ha_ratios", "positions", "method", "a") if k in s}
    return SweepSpec(order=s["order"], mc=mc, **kwargs)


def cmd_sweep(args, cfg, out) -> int:
    params = build_params(cfg.system, args)
    spec = _sweep_spec(args, cfg)
    path = args.output or cfg.output.get("path", "sweep.csv")
    fmt = args.format or cfg.output.get("format", "csv")
    plot_fmt = args.plot_format or cfg.output.get("plot_format", "svg")

    result = run_sweep(spec, params)
    try:
        write_csv(path, format_csv(result, spec, params))
    except OSError as exc:
        print(f"error: cannot write {path!r}: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_FAIL
    print(f"wrote {len(result.rows)} rows to {path}", file=out)
    for ks in result.k_star:
        print(f"h/a={ks.h_over_a:g} z=({ks.z_x:g},{ks.z_y:g}) {ks.method}: K*={ks.k_star} G*={ks.g_star:.9g}",
              file=out)
    if fmt == "csv+plot":
        from . import plotting

        try:
            files = plotting.emit(result, spec, path, plot_fmt)
        except OSError as exc:
            print(f"error: cannot write plot files: {exc.strerror or exc}", file=sys.stderr)
            return EXIT_FAIL
        except ImportError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_FAIL
        for f in files:
            print(f"wrote {f}", file=out)
    for row in result.failures:
        print(f"warning: h/a={row.h_over_a:g} K={row.K} z=({row.z_x:g},{row.z_y:g}) {row.method}: {row.error}",
              file=sys.stderr)
    return EXIT_OK


# MC checks need the variance resolved well below the 5% tolerance
_MC_MAX_REL_STDERR_VAR = 0.01
_VALIDATE_MC_CELLS = ((3.0, 5), (5.0, 8), (7.0, 9))


def cmd_validate(args, cfg, out) -> int:
    params = build_params(cfg.system, args)
    checks = []  # (name, status, detail) with status in {"pass", "FAIL", "inconclusive"}

    worst = 0.0
    for ratio in (3.0, 5.0, 7.0):
        for K in range(1, 16):
            spec = LatticeSpec.from_ratio(ratio, K)
            L = spec.spacing
            for pos in (ReceiverPos(), ReceiverPos(0.25 * L, 0.0), ReceiverPos(0.25 * L, 0.25 * L)):
                cf = metrics(pos, spec, params).moments
                ex = exact_moments(pos, spec, params)
                worst = max(worst, abs(cf.mu / ex.mu - 1), abs(cf.sigma1_sq / ex.sigma1_sq - 1))
    checks.append(("closed form vs exact sum (135 points, rel 1e-5)",
                   "pass" if worst <= 1e-5 else "FAIL", f"worst rel diff {worst:.2e}"))

    for ratio, K in _VALIDATE_MC_CELLS:
        spec = LatticeSpec.from_ratio(ratio, K)
        pos = ReceiverPos()
        lm = metrics(pos, spec, params)
        rep = simulate(pos, spec, params, McConfig(n_slots=args.n_slots, seed=args.seed))
        tag = f"MC h/a={ratio:g} K={K}"
        if rep.stderr_var > _MC_MAX_REL_STDERR_VAR * lm.moments.sigma1_sq:
            checks.append((tag, "inconclusive",
                           f"variance stderr {rep.stderr_var / lm.moments.sigma1_sq:.1%} of sigma1^2; "
                           f"raise --n-slots"))
            continue
        z = (rep.emp_mean - lm.moments.mu) / rep.stderr_mean if rep.stderr_mean > 0 else math.inf
        checks.append((f"{tag} mean within 4 stderr", "pass" if abs(z) <= 4 else "FAIL", f"z = {z:+.2f}"))
        rel = rep.emp_var / lm.moments.sigma1_sq - 1
        checks.append((f"{tag} variance within 5%", "pass" if abs(rel) <= 0.05 else "FAIL", f"rel {rel:+.3%}"))
        ok = rep.emp_ser <= lm.p_e + 4 * rep.stderr_ser
        checks.append((f"{tag} SER <= p_e + 4 stderr", "pass" if ok else "FAIL",
                       f"SER {rep.emp_ser:.5f} vs p_e {lm.p_e:.5f}"))

    width = max(len(c[0]) for c in checks)
    for name, status, detail in checks:
        print(f"{status:>12}  {name.ljust(width)}  {detail}", file=out)
    print(f"kernel backend: {_kernels.BACKEND}", file=out)
    if any(s == "inconclusive" for _, s, _ in checks):
        print("warning: some Monte Carlo checks were inconclusive", file=sys.stderr)
    failed = [n for n, s, _ in checks if s == "FAIL"]
    if failed:
        print("failed checks: " + "; ".join(failed), file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


_COMMANDS = {"metrics": cmd_metrics, "sweep": cmd_sweep, "optimize": cmd_optimize, "validate": cmd_validate}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse reports usage errors as exit 2
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        cfg = load_config(args.config) if args.config else RunConfig({}, {}, {})
        return _COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"attocell: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError) as exc:
        print(f"attocell: error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
