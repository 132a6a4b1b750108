import json
import math
import subprocess
import sys

import numpy as np
import pytest

from nhwishart import cli, ingest
from nhwishart.ensemble import sample_complex_gaussian, trial_stream
from conftest import SEED


def write_panel(path, values, names=None):
    values = np.asarray(values)
    names = names or [f"c{i}" for i in range(values.shape[0])]

    def cell(v):
        v = complex(v)
        if np.iscomplexobj(values):
            return f"{v.real!r}{v.imag:+.17g}i"
        return repr(v.real)

    lines = [",".join(names)] + [",".join(cell(v) for v in col) for col in values.T]
    path.write_text("\n".join(lines) + "\n")
    return path


def panel(values):
    return ingest.ChannelPanel(np.asarray(values), tuple(f"c{i}" for i in range(len(values))))


# --- loading ----------------------------------------------------------------

def test_load_well_formed(tmp_path):
    p = tmp_path / "a.csv"
    p.write_text("# comment\nx,y,z\n1,2,3\n4,5,6\n# mid comment\n7,8,9\n1,1,1\n0,0,2\n")
    pnl = ingest.load_timeseries(p)
    assert (pnl.channels, pnl.length) == (3, 5)
    assert pnl.channel_names == ("x", "y", "z")
    assert np.array_equal(pnl.values[1], [2, 5, 8, 1, 0])
    assert not pnl.is_complex


def test_load_complex_literal(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("a,b\n1.5+2i,3\n-1-0.5i,2j\n")
    pnl = ingest.load_timeseries(p)
    assert pnl.is_complex and pnl.values[0, 0] == 1.5 + 2j and pnl.values[0, 1] == -1 - 0.5j
    assert pnl.values[1, 1] == 2j


def test_load_blank_cell_names_position(tmp_path):
    p = tmp_path / "b.csv"
    p.write_text("a,b,c\n1,2,3\n4,5,6\n7,,9\n")
    with pytest.raises(ingest.NonNumericCellError) as err:
        ingest.load_timeseries(p)
    assert (err.value.row, err.value.column) == (4, 2)
    assert "row 4, column 2" in str(err.value)


@pytest.mark.parametrize("body,exc,row,col", [
    ("a,b\n1,2\n3\n", ingest.RaggedRowError, 3, None),
    ("a,b\n1,x\n3,4\n", ingest.NonNumericCellError, 2, 2),
    ("a,b\n1,2\nnan,4\n", ingest.NonFiniteCellError, 3, 1),
    ("a,b\n1,inf\n3,4\n", ingest.NonFiniteCellError, 2, 2),
    ("a,b\n1,2\n", ingest.TooFewPointsError, None, None),
])
def test_load_errors_are_distinct(tmp_path, body, exc, row, col):
    p = tmp_path / "e.csv"
    p.write_text(body)
    with pytest.raises(exc) as err:
        ingest.load_timeseries(p)
    assert (err.value.row, err.value.column) == (row, col)


def test_load_duplicate_names_and_missing_file(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("a,a\n1,2\n3,4\n")
    with pytest.raises(ingest.TimeseriesFormatError):
        ingest.load_timeseries(p)
    with pytest.raises(OSError, match="missing.csv"):
        ingest.load_timeseries(tmp_path / "missing.csv")


# --- standardization and cross matrix --------------------------------------

def test_standardize_examples():
    out = ingest.standardize_channels(panel([[1.0, 3.0]]))
    assert np.array_equal(out.values, [[-1.0, 1.0]])
    with pytest.raises(ingest.ZeroVarianceError, match="c1"):
        ingest.standardize_channels(panel([[1.0, 2.0], [5.0, 5.0]]))


def test_standardize_is_idempotent_and_unit_variance():
    g = np.random.default_rng(3)
    raw = panel(3 + 2 * g.normal(size=(4, 50)) + 1j * g.normal(size=(4, 50)))
    once = ingest.standardize_channels(raw)
    assert np.allclose(once.values.mean(axis=1), 0, atol=1e-15)
    assert np.allclose(np.mean(np.abs(once.values) ** 2, axis=1), 1, atol=1e-14)
    twice = ingest.standardize_channels(once)
    assert np.max(np.abs(twice.values - once.values)) <= 1e-14


def test_cross_matrix():
    g = np.random.default_rng(4)
    x = g.normal(size=(3, 4)) + 1j * g.normal(size=(3, 4))
    y = g.normal(size=(3, 4)) + 1j * g.normal(size=(3, 4))
    c = ingest.cross_matrix(panel(x), panel(y))
    loop = np.array([[sum(x[a, t] * np.conj(y[b, t]) for t in range(4)) for b in range(3)] for a in range(3)])
    assert np.max(np.abs(c - loop)) <= 1e-14
    real = g.normal(size=(3, 6))
    h = ingest.cross_matrix(panel(real), panel(real))
    assert np.allclose(h, h.conj().T, rtol=0, atol=1e-14)
    one = ingest.cross_matrix(panel(x[:1]), panel(y[:1]))
    assert one.shape == (1, 1) and one[0, 0] == pytest.approx(np.vdot(y[0], x[0]), rel=1e-14)
    with pytest.raises(ValueError):
        ingest.cross_matrix(panel(x), panel(y[:, :3]))


# --- denoising --------------------------------------------------------------

def null_panels(seed, n=30, m=120):
    g = trial_stream(seed, 0)
    return panel(sample_complex_gaussian(n, m, 1.0, g)), panel(sample_complex_gaussian(n, m, 1.0, g))


def planted_panels(seed, n=30, m=120):
    g = trial_stream(seed, 0)
    x = sample_complex_gaussian(n, m, 1.0, g)
    y = sample_complex_gaussian(n, m, 1.0, g)
    y[7] = x[7] + 0.3 * sample_complex_gaussian(1, m, 1.0, g)[0]
    return panel(x), panel(y)


def test_null_edge_width_selection():
    assert ingest.null_edge_width(100, 105) == ("II", 200.0, 20.0)
    reg, edge, width = ingest.null_edge_width(30, 120)
    assert reg == "III" and edge == pytest.approx(120) and width == pytest.approx(math.sqrt(300))
    assert ingest.null_edge_width(30, 120, "II")[0] == "II"
    with pytest.raises(ValueError):
        ingest.null_edge_width(30, 30, "III")


def test_planted_signal_is_flagged():
    x, y = planted_panels(SEED)
    rep = ingest.denoise_panels(x, y, null_trials=200, seed=SEED)
    top = int(np.argmax(np.abs(rep.eigenvalues_std)))
    assert rep.flags[top] and rep.p_values[top] <= 0.01
    assert np.all((rep.p_values >= 0) & (rep.p_values <= 1))
    assert np.array_equal(rep.flags, np.abs(rep.eigenvalues_std) > rep.threshold)
    assert rep.data_kind == "complex" and rep.caveats == []


def test_null_false_positive_rate_over_repetitions():
    reps, flags, expected = 50, 0, 0.0
    for k in range(reps):
        x, y = null_panels(SEED + 1 + k)
        rep = ingest.denoise_panels(x, y, null_trials=100, seed=k)
        flags += int(np.count_nonzero(rep.flags))
        expected += rep.false_positive_rate
    # Poisson upper bound on the total flag count given the Monte Carlo rate
    assert flags <= expected + 3 * math.sqrt(max(expected, 1.0))


def test_null_self_consistency_at_the_bare_edge():
    # threshold_k = 0 puts the threshold on the analytic edge, so flags are common
    # and the observed count can be compared two-sided with the Monte Carlo rate
    flags, expected = 0, 0.0
    for k in range(50):
        x, y = null_panels(SEED + 100 + k)
        rep = ingest.denoise_panels(x, y, null_trials=100, seed=k, threshold_k=0.0)
        flags += int(np.count_nonzero(rep.flags))
        expected += rep.false_positive_rate
    assert expected > 20
    assert abs(flags - expected) <= 3 * math.sqrt(expected) + 0.1 * expected


def test_scale_invariance_of_flags():
    x, y = planted_panels(SEED)
    base = ingest.denoise_panels(x, y, 50, SEED)
    scaled = ingest.denoise_panels(panel(x.values * 37.5), y, 50, SEED)
    assert np.array_equal(base.flags, scaled.flags)
    assert np.allclose(base.eigenvalues_std, scaled.eigenvalues_std, rtol=1e-10)


def test_real_data_carries_caveat():
    g = np.random.default_rng(8)
    rep = ingest.denoise_panels(panel(g.normal(size=(5, 40))), panel(g.normal(size=(5, 40))), 20, SEED)
    assert rep.data_kind == "real" and rep.caveats


def test_denoise_rejects_bad_shapes():
    x, y = null_panels(1, n=5, m=20)
    with pytest.raises(ValueError):
        ingest.denoise_panels(x, panel(y.values[:, :10]), 10, 0)
    g = np.random.default_rng(0)
    wide = panel(g.normal(size=(6, 4)))
    with pytest.raises(ValueError, match="m >= n"):
        ingest.denoise_panels(wide, wide, 10, 0)


def test_denoise_report_file_is_deterministic(tmp_path):
    x, y = planted_panels(SEED, n=8, m=40)
    px = write_panel(tmp_path / "x.csv", x.values)
    py = write_panel(tmp_path / "y.csv", y.values)
    ingest.denoise(px, py, 30, SEED, out_path=tmp_path / "r1.json")
    ingest.denoise(px, py, 30, SEED, out_path=tmp_path / "r2.json")
    assert (tmp_path / "r1.json").read_bytes() == (tmp_path / "r2.json").read_bytes()
    report = json.loads((tmp_path / "r1.json").read_text())
    assert set(report) == {"config", "eigenvalues", "null", "caveats"}
    assert {"edge", "width", "regime", "trials"} <= set(report["null"])
    assert set(report["eigenvalues"][0]) == {"re", "im", "abs", "p_value", "flagged"}
    assert len(report["eigenvalues"]) == 8


# --- command line ----------------------------------------------------------

def test_cli_density(tmp_path, capsys):
    assert cli.main(["density", "--n", "5", "--nu", "2", "--r", "0..10", "--points", "200"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r,exact,regime1,regime2,regime3" and len(lines) == 201


def test_cli_sample_matches_library(tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["sample", "--n", "10", "--m", "105", "--trials", "500", "--seed", "1",
                     "--workers", "4", "--out", str(out)]) == 0
    data = np.loadtxt(out, delimiter=",", skiprows=1)
    assert data.shape == (5000, 2)


def test_cli_figure(tmp_path):
    assert cli.main(["figure", "--id", "2", "--seed", "7", "--out", str(tmp_path), "--trials", "5"]) == 0
    assert (tmp_path / "scatter.csv").exists() and (tmp_path / "meta.json").exists()


def test_cli_compare_and_mp(tmp_path, capsys):
    assert cli.main(["compare", "--n", "3", "--nu", "1", "--trials", "200", "--seed", "2",
                     "--out", str(tmp_path / "cmp")]) == 0
    assert json.loads(capsys.readouterr().out)["config"]["n"] == 3
    assert cli.main(["mp-baseline", "--n", "20", "--m", "40", "--trials", "5", "--seed", "2"]) == 0
    assert "l1" in json.loads(capsys.readouterr().out)


def test_cli_denoise(tmp_path):
    x, y = planted_panels(SEED, n=8, m=40)
    px = write_panel(tmp_path / "x.csv", x.values)
    py = write_panel(tmp_path / "y.csv", y.values)
    out = tmp_path / "r.json"
    assert cli.main(["denoise", "--x", str(px), "--y", str(py), "--null-trials", "20",
                     "--seed", "3", "--out", str(out), "--regime", "II"]) == 0
    assert json.loads(out.read_text())["null"]["regime"] == "II"


@pytest.mark.parametrize("argv", [
    ["sample", "--n", "3", "--m", "4"],  # missing seed
    ["figure", "--id", "2", "--out", "x"],  # missing seed
    ["denoise", "--x", "a", "--y", "b", "--out", "c"],  # missing seed
    ["bogus"],
    ["density", "--n", "5", "--nu", "2", "--r", "10..0"],
    ["sample", "--n", "3", "--m", "4", "--seed", "1", "--frobnicate"],
])
def test_cli_usage_errors(argv, capsys):
    assert cli.main(argv) == 1
    assert "usage" in capsys.readouterr().err


def test_cli_input_and_numerical_errors(tmp_path, monkeypatch, capsys):
    assert cli.main(["sample", "--n", "5", "--m", "3", "--seed", "1"]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,\n")
    assert cli.main(["denoise", "--x", str(bad), "--y", str(bad), "--seed", "1", "--out", "r.json"]) == 1

    def boom(*a, **k):
        from nhwishart.ensemble import ConvergenceError
        raise ConvergenceError("forced")

    monkeypatch.setattr(cli, "sample_spectrum", boom)
    assert cli.main(["sample", "--n", "3", "--m", "4", "--seed", "1"]) == 2
    assert "numerical failure" in capsys.readouterr().err


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "nhwishart.cli", "density", "--n", "2", "--nu", "0",
                        "--r", "1..2", "--points", "2"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("r,exact")
