import csv
import io
import math
import os

import pytest

from attocell.lattice import ReceiverPos
from attocell.mcsim import McConfig
from attocell.sweep import COLUMNS, SweepRow, SweepSpec, format_csv, run_sweep, write_csv


def parse(text):
    body = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(body))))


def test_row_count_and_order(params):
    spec = SweepSpec(k_values=(3, 1, 2), ha_ratios=(5.0, 3.0),
                     positions=(ReceiverPos(), ReceiverPos(0.2, 0.1)), method="both")
    rows = run_sweep(spec, params).rows
    assert len(rows) == 3 * 2 * 2 * 2
    keys = [(r.h_over_a, r.K, (r.z_x, r.z_y), r.method) for r in rows]
    expected = [(ratio, K, (p.z_x, p.z_y), m) for ratio in (5.0, 3.0) for K in (3, 1, 2)
                for p in spec.positions for m in ("closed-form", "exact-sum")]
    assert keys == expected


def test_single_cell(params):
    result = run_sweep(SweepSpec(k_values=(4,), ha_ratios=(3.0,)), params)
    assert len(result.rows) == 1
    assert result.k_star[0].k_star == 4


def test_methods_agree_within_oracle_tolerance(params):
    spec = SweepSpec(k_values=tuple(range(1, 16)), ha_ratios=(3.0, 7.0), method="both",
                     positions=(ReceiverPos(), ReceiverPos(0.25, 0.0)))
    rows = run_sweep(spec, params).rows
    for cf, ex in zip(rows[::2], rows[1::2]):
        assert (cf.method, ex.method) == ("closed-form", "exact-sum")
        assert cf.mu == pytest.approx(ex.mu, rel=1e-5)
        assert cf.sigma1_sq == pytest.approx(ex.sigma1_sq, rel=1e-5)


def test_failed_cells_become_error_rows(params):
    spec = SweepSpec(k_values=(1, 2), ha_ratios=(3.0,), positions=(ReceiverPos(0.8, 0.0),))
    result = run_sweep(spec, params)
    assert len(result.rows) == 2
    bad, good = result.rows
    assert "outside the tagged attocell" in bad.error and math.isnan(bad.p_e)
    assert good.error == "" and good.p_e == 1.0
    assert result.failures == (bad,)
    assert result.k_star[0].k_star == 2


def test_k_star_summary_matches_rows(params):
    result = run_sweep(SweepSpec(), params)
    assert len(result.rows) == 45
    for ks in result.k_star:
        rows = [r for r in result.rows if r.h_over_a == ks.h_over_a]
        best = max(r.goodput for r in rows)
        assert ks.g_star == best
        assert ks.k_star == min(r.K for r in rows if r.goodput == best)


def test_csv_layout(params):
    spec = SweepSpec(k_values=(9,), ha_ratios=(3.0,))
    text = format_csv(run_sweep(spec, params), spec, params)
    lines = text.splitlines()
    meta = [line for line in lines if line.startswith("#")]
    assert lines[: len(meta)] == meta
    assert lines[len(meta)] == ",".join(COLUMNS)
    assert any(line.startswith("# a=1 h=3") for line in meta)
    assert any("K*=9" in line for line in meta)
    row = parse(text)[0]
    # at least 9 significant digits
    assert len(row["goodput"].replace(".", "").lstrip("0")) >= 9
    assert float(row["goodput"]) == pytest.approx(run_sweep(spec, params).rows[0].goodput, rel=1e-11)


def test_csv_byte_identical_rerun(params):
    spec = SweepSpec(k_values=(8, 9), ha_ratios=(3.0,), mc=McConfig(n_slots=2_000, seed=4, oracle_radius=5))
    a = format_csv(run_sweep(spec, params), spec, params)
    b = format_csv(run_sweep(spec, params), spec, params)
    assert a == b
    assert "# mc: seed=4" in a
    assert parse(a)[0]["mc_emp_ser"] != ""


def test_error_text_quoted(params):
    spec = SweepSpec(k_values=(1,), ha_ratios=(3.0,), positions=(ReceiverPos(0.8, 0.0),))
    rows = parse(format_csv(run_sweep(spec, params), spec, params))
    assert rows[0]["error"].startswith("OutOfCellError")
    assert rows[0]["p_e"] == ""


def test_atomic_write_replaces_file(tmp_path):
    target = tmp_path / "out.csv"
    target.write_text("old")
    write_csv(str(target), "new\n")
    assert target.read_text() == "new\n"
    assert [p.name for p in tmp_path.iterdir()] == ["out.csv"]
    assert os.stat(target).st_mode & 0o777 == 0o666 & ~_umask()


def _umask():
    mask = os.umask(0)
    os.umask(mask)
    return mask


def test_atomic_write_unwritable(tmp_path):
    with pytest.raises(OSError):
        write_csv(str(tmp_path / "missing" / "out.csv"), "x")


@pytest.mark.parametrize("kwargs", [dict(k_values=()), dict(k_values=(0,)), dict(ha_ratios=(-3.0,)),
                                    dict(positions=()), dict(method="all"), dict(a=0.0)])
def test_spec_validation(kwargs):
    with pytest.raises(ValueError):
        SweepSpec(**kwargs)


def test_row_fields_are_columns():
    assert COLUMNS[:5] == ("h_over_a", "K", "z_x", "z_y", "method")
    assert set(COLUMNS) == set(SweepRow.__dataclass_fields__)
