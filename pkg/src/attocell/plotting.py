"""Plot files for sweep results: one per (metric, h/a), metric against K.

``svg`` renders with matplotlib (Agg, imported lazily; optional dependency).
``gnuplot`` writes a script that reads the CSV directly and needs nothing at
write time.
"""
from __future__ import annotations

import os

from .sweep import COLUMNS, SweepResult, SweepSpec

PLOT_METRICS = ("p_e", "r_reported", "goodput")
_LABELS = {"p_e": "symbol error probability", "r_reported": "rate (bit/s)", "goodput": "goodput (bit/s)"}


def _stem(csv_path: str, metric: str, ratio: float) -> str:
    base, _ = os.path.splitext(csv_path)
    return f"{base}_{metric}_ha{ratio:g}"


def _series(result: SweepResult, ratio: float):
    # one line per (position, method), ascending K
    groups = {}
    for row in result.rows:
        if row.h_over_a != ratio or row.error:
            continue
        groups.setdefault((row.z_x, row.z_y, row.method), []).append(row)
    return {k: sorted(v, key=lambda r: r.K) for k, v in groups.items()}


def _emit_svg(result, spec, csv_path):
    try:
        import matplotlib
    except ImportError:
        raise ImportError("svg plots need matplotlib (pip install 'attocell[plot]'); "
                          "or use --plot-format gnuplot") from None
    matplotlib.use("Agg")
    from matplotlib import pyplot as plt

    files = []
    # fixed salt gives stable svg element ids across runs
    with matplotlib.rc_context({"svg.hashsalt": "attocell"}):
        for ratio in spec.ha_ratios:
            _svg_ratio(plt, result, ratio, csv_path, files)
    return files


def _svg_ratio(plt, result, ratio, csv_path, files):
    series = _series(result, ratio)
    for metric in PLOT_METRICS:
        fig, ax = plt.subplots(figsize=(6, 4))
        for (zx, zy, method), rows in series.items():
            ax.plot([r.K for r in rows], [getattr(r, metric) for r in rows], marker="o",
                    label=f"z=({zx:g},{zy:g}) {method}")
        ax.set_xlabel("K")
        ax.set_ylabel(_LABELS[metric])
        ax.set_title(f"h/a = {ratio:g}")
        ax.grid(True, alpha=0.3)
        if series:
            ax.legend(fontsize="small")
        path = _stem(csv_path, metric, ratio) + ".svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        files.append(path)


def _emit_gnuplot(result, spec, csv_path):
    col = {name: i + 1 for i, name in enumerate(COLUMNS)}
    data = os.path.basename(csv_path)
    files = []
    for ratio in spec.ha_ratios:
        keys = sorted(_series(result, ratio))
        for metric in PLOT_METRICS:
            stem = _stem(csv_path, metric, ratio)
            lines = [
                f"# metric {metric} against K at h/a = {ratio:g}; run from the CSV's directory",
                'set datafile separator ","',
                "set terminal svg size 600,400",
                f"set output '{os.path.basename(stem)}.svg'",
                "set xlabel 'K'",
                f"set ylabel '{_LABELS[metric]}'",
                f"set title 'h/a = {ratio:g}'",
                "set grid",
            ]
            plots = []
            for zx, zy, method in keys:
                cond = (f"($1=={ratio:.12g} && $3=={zx:.12g} && $4=={zy:.12g} "
                        f"&& strcol(5) eq '{method}')")
                plots.append(f"'{data}' every ::1 using {col['K']}:({cond} ? ${col[metric]} : 1/0) "
                             f"with linespoints title 'z=({zx:g},{zy:g}) {method}'")
            lines.append("plot " + ", \\\n     ".join(plots) if plots else "# no successful rows to plot")
            path = stem + ".gp"
            with open(path, "w") as fh:
                fh.write("\n".join(lines) + "\n")
            files.append(path)
    return files


def emit(result: SweepResult, spec: SweepSpec, csv_path: str, fmt: str = "svg") -> list:
    """Write plot files next to ``csv_path`` and return their paths."""
    if fmt == "svg":
        return _emit_svg(result, spec, csv_path)
    if fmt == "gnuplot":
        return _emit_gnuplot(result, spec, csv_path)
    raise ValueError(f"plot format must be 'svg' or 'gnuplot', got {fmt!r}")
