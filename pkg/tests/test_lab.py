import math

import pytest

from conelab.lab import (
    ConfigError,
    DivergenceConfig,
    SweepConfig,
    config_from_file,
    divergence_sequence,
    emit_report,
    render_compare,
    render_divergence,
    render_report,
    render_sweep,
    sweep_almost_isometry,
    sweep_teich_comparison,
)
from conelab import cli

SMALL = SweepConfig(grid_max=2.0, enum_height=40, orbit_radius=2)


def test_config_validation():
    SweepConfig().validate()
    for bad in (
        SweepConfig(grid_min=-1.0),
        SweepConfig(grid_step=0.0),
        SweepConfig(grid_max=-0.5),
        SweepConfig(enum_height=0),
        SweepConfig(orbit_radius=-1),
        SweepConfig(tol=0.0),
        SweepConfig(jobs=0),
    ):
        with pytest.raises(ConfigError):
            bad.validate()


def test_grid_inclusive_endpoints():
    assert SweepConfig(grid_min=0.0, grid_max=2.0, grid_step=0.5).grid() == [
        0.0, 0.5, 1.0, 1.5, 2.0,
    ]
    assert SweepConfig(grid_min=1.0, grid_max=1.0).grid() == [1.0]


def test_sweep_rows_and_summary():
    rows, summary = sweep_almost_isometry(SMALL)
    n = len(SMALL.grid())
    assert len(rows) == n * n
    for r in rows:
        if r.x == r.y:
            assert r.d_v == 0.0 and r.d_l_lower == 0.0 and r.delta == 0.0
        assert r.d_v >= 0.0 and r.d_l_lower >= -1e-15
    # summary values are pure functions of the rows
    assert summary.max_delta == max(r.delta for r in rows)
    far = [r.delta for r in rows if r.d_v >= 2.0]
    assert summary.max_delta_far == (max(far) if far else 0.0)
    assert summary.undercut_count == sum(
        1 for r in rows if r.d_v - r.d_l_lower > 1e-6
    )
    assert summary.wolpert_violations == ()


def test_sweep_frozen_single_pair():
    # pair (0, 4) at full production knobs, frozen from the slope
    # enumeration oracle: the bound equals the ray distance exactly
    cfg = SweepConfig(grid_min=0.0, grid_max=4.0, grid_step=4.0)
    rows, _ = sweep_almost_isometry(cfg)
    row = next(r for r in rows if r.x == 0.0 and r.y == 4.0)
    assert row.d_v == 2.0
    assert row.d_l_lower == pytest.approx(2.0, abs=1e-9)
    assert row.d_t_est == pytest.approx(2.0, abs=1e-12)


def test_compare_report():
    rows, summary = sweep_teich_comparison(SMALL)
    assert summary.degeneration_violations == ()
    assert summary.wolpert_violations == ()
    for r in rows:
        assert r.zero_twist_residual <= 1e-12
        assert r.gap == r.d_t_est - r.d_l_lower
    assert summary.max_gap == max(r.gap for r in rows)


def test_wolpert_violation_reporting():
    rows, summary = sweep_almost_isometry(
        SweepConfig(grid_max=1.0, enum_height=30, orbit_radius=1, c_slack=-0.5)
    )
    assert summary.wolpert_violations  # negative slack forces violations
    text = render_sweep(SMALL, rows, summary)
    assert "# violations" in text
    assert "# violation " in text


def test_divergence_schedule_and_overrides():
    rows = divergence_sequence(DivergenceConfig(n_max=6, enum_height=20))
    assert [r.n for r in rows] == [1, 2, 3, 4, 5, 6]
    for r in rows:
        assert r.twists == round(2.0 ** (r.n / 2.0))
        assert r.length == 0.5 * 2.0 ** (-r.n)
        assert r.d_ls_lower > 0.0 and r.teich_est > 0.0
    # zero-twist override: both columns collapse to zero
    rows0 = divergence_sequence(
        DivergenceConfig(n_max=2, enum_height=10, twists=(0, 0))
    )
    for r in rows0:
        assert r.d_ls_lower == 0.0 and r.teich_est == 0.0 and r.ratio == 0.0
    with pytest.raises(ConfigError):
        divergence_sequence(DivergenceConfig(n_max=3, twists=(1,)))
    with pytest.raises(ConfigError):
        divergence_sequence(0)


def test_divergence_same_moduli_point():
    rows = divergence_sequence(DivergenceConfig(n_max=1, enum_height=20))
    from conelab.modelmap import moduli_ls_distance
    from conelab.hypgeom import dehn_twist, zero_twist_point

    x1 = zero_twist_point(rows[0].length)
    y1 = dehn_twist(x1, rows[0].twists)
    assert moduli_ls_distance(x1, y1, 20, rows[0].twists + 2).lower <= 1e-12


def test_render_deterministic_and_sections(tmp_path):
    rows, summary = sweep_almost_isometry(SMALL)
    text1 = render_sweep(SMALL, rows, summary)
    rows2, summary2 = sweep_almost_isometry(SMALL)
    assert text1 == render_sweep(SMALL, rows2, summary2)
    assert text1.startswith("# conelab sweep ")
    out = tmp_path / "r.csv"
    emit_report(text1, out)
    assert out.read_text() == text1
    # header-only when there are no rows
    empty = render_report("sweep empty", ["a", "b"], [], [], [])
    assert empty == "# conelab sweep empty\na,b\n"


def test_render_row_count_matches_grid_square():
    rows, summary = sweep_almost_isometry(SMALL)
    text = render_sweep(SMALL, rows, summary)
    data_lines = [
        ln for ln in text.splitlines() if ln and not ln.startswith("#")
    ]
    assert len(data_lines) - 1 == len(SMALL.grid()) ** 2  # minus column header


def test_emit_report_io_error(tmp_path):
    with pytest.raises(OSError, match="no/such"):
        emit_report("x\n", tmp_path / "no" / "such" / "dir.csv")


def test_config_file_merge(tmp_path):
    f = tmp_path / "cfg"
    f.write_text("grid-min = 1.0\nheight = 60\norbit-radius=2\n# note\n")
    cfg = config_from_file(f, SweepConfig())
    assert cfg.grid_min == 1.0
    assert cfg.enum_height == 60
    assert cfg.orbit_radius == 2
    f.write_text("nope = 1\n")
    with pytest.raises(ConfigError, match="line 1"):
        config_from_file(f, SweepConfig())
    f.write_text("height ten\n")
    with pytest.raises(ConfigError, match="key = value"):
        config_from_file(f, SweepConfig())
    f.write_text("height = ten\n")
    with pytest.raises(ConfigError, match="bad value"):
        config_from_file(f, SweepConfig())


def test_cli_dist_and_project(capsys):
    assert cli.main(["dist", "0", "4", "--height", "60", "--orbit-radius", "2"]) == 0
    out = capsys.readouterr().out
    assert "d_V = 2" in out and "d_L_lower = 2" in out and "d_T_est = 2" in out
    assert cli.main(["project", "3", "3", "3"]) == 0
    out = capsys.readouterr().out
    assert "model_coordinate = 0" in out
    assert "systole_slope = 1/0" in out


def test_cli_exit_codes(tmp_path, capsys):
    # config error from a bad config file
    bad = tmp_path / "bad.cfg"
    bad.write_text("no_such_key = 3\n")
    assert cli.main(["sweep", "--config", str(bad)]) == 2
    capsys.readouterr()
    # config error from invalid values
    assert cli.main(["sweep", "--grid-step", "-1", "--grid-max", "1"]) == 2
    capsys.readouterr()
    # invalid trace triple
    assert cli.main(["project", "3", "3", "4"]) == 2
    capsys.readouterr()
    # property violations: exit 3, report still written
    viol = tmp_path / "viol.cfg"
    viol.write_text("c_slack = -0.5\n")
    out = tmp_path / "report.csv"
    code = cli.main([
        "sweep", "--config", str(viol), "--grid-max", "1",
        "--height", "30", "--orbit-radius", "1", "--out", str(out),
    ])
    assert code == 3
    assert out.exists() and "# violation " in out.read_text()
    capsys.readouterr()


def test_cli_flag_overrides_config(tmp_path, capsys):
    f = tmp_path / "cfg"
    f.write_text("height = 30\ngrid-max = 1.0\norbit-radius = 1\n")
    out = tmp_path / "a.csv"
    assert cli.main(["sweep", "--config", str(f), "--height", "35",
                     "--out", str(out)]) == 0
    text = out.read_text()
    assert "height=35" in text
    assert "grid_max=1" in text
    capsys.readouterr()


def test_cli_diverge(tmp_path, capsys):
    out = tmp_path / "d.csv"
    assert cli.main(["diverge", "--n-max", "4", "--height", "20",
                     "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    data = [ln for ln in lines if ln and not ln.startswith("#")]
    assert data[0] == "n,twists,length,d_ls_lower,teich_est,ratio"
    assert len(data) == 5
    capsys.readouterr()


def test_cli_serial_parallel_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["sweep", "--grid-max", "1.5", "--height", "40",
            "--orbit-radius", "2"]
    assert cli.main(args + ["--out", str(a)]) == 0
    assert cli.main(args + ["--jobs", "3", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
