import json
import math

import numpy as np
import pytest

from nhwishart import asymptotics as A
from nhwishart import finite_n as F
from nhwishart import harness as H
from nhwishart.ensemble import EnsembleConfig, SpectrumSample, sample_spectrum
from conftest import FIG1_COUNT, FIG1_OUTSIDE_FIXTURE, SEED


def synthetic_sample(points, n):
    pts = np.asarray(points, dtype=complex).reshape(-1, n)
    cfg = EnsembleConfig(n=n, m=n, trials=pts.shape[0], seed=0)
    return SpectrumSample(cfg, pts, np.zeros(pts.shape[0]))


# --- histograms and distances ----------------------------------------------

def test_counting_identity():
    s = sample_spectrum(EnsembleConfig(n=6, m=9, trials=50, seed=SEED))
    for r_max in (2.0, 10.0, 40.0):
        c = H.radial_histogram(s, bins=17, r_max=r_max)
        assert np.sum(c.counts) + c.out_of_range == 300
        assert c.total_mass() * c.trials + c.out_of_range == pytest.approx(300, rel=1e-13)
        assert c.bin_edges[0] == 0 and np.all(np.diff(c.bin_edges) > 0)


def test_uniform_disk_gives_flat_density():
    g = np.random.default_rng(5)
    n, trials, radius = 50, 400, 3.0
    r = radius * np.sqrt(g.random(n * trials))
    pts = r * np.exp(2j * np.pi * g.random(n * trials))
    c = H.radial_histogram(synthetic_sample(pts, n), bins=10, r_max=radius)
    expected = n / (math.pi * radius ** 2)
    sigma = np.sqrt(c.counts) / (trials * c.areas)
    assert np.all(np.abs(c.density - expected) <= 4 * sigma)


def test_repeated_eigenvalue_lands_in_one_bin():
    c = H.radial_histogram(synthetic_sample(np.full(12, 1.7 + 0j), 4), bins=8, r_max=4.0)
    assert np.count_nonzero(c.counts) == 1 and c.counts.sum() == 12


def test_radial_histogram_rejects_bad_range():
    with pytest.raises(ValueError):
        H.radial_histogram(synthetic_sample([1.0], 1), bins=4, r_max=0.0)


def exact_curve(density, bins=40, r_max=10.0):
    edges = np.linspace(0, r_max, bins + 1)
    c = 0.5 * (edges[1:] + edges[:-1])
    return H.RadialDensityCurve(edges, density(c), np.zeros(bins, dtype=int), 1, 1)


def test_curve_distance_identities():
    dens = lambda r: np.exp(-r)
    curve = exact_curve(dens)
    assert H.curve_distance(curve, dens, (0, 10)) == (0.0, 0.0)
    l1, sup = H.curve_distance(curve, lambda r: dens(r) / 1.01, (0, 10))
    assert sup == pytest.approx(0.01, rel=1e-10)
    with pytest.raises(ValueError):
        H.curve_distance(curve, dens, (20, 30))


def test_fraction_outside_limits():
    s = sample_spectrum(EnsembleConfig(n=4, m=6, trials=3, seed=SEED))
    assert H.fraction_outside(s, 0.0) == 1.0
    assert H.fraction_outside(s, 1e9) == 0.0


def test_monte_carlo_matches_exact_density():
    s = sample_spectrum(EnsembleConfig(n=5, m=7, trials=20_000, seed=SEED), workers=4)
    c = H.radial_histogram(s, bins=80, r_max=40.0)
    l1, _ = H.curve_distance(c, lambda r: F.mean_density_radial(5, 2, r), (0, 40.0))
    assert c.out_of_range == 0
    assert l1 <= 0.02 * 5


# --- edge fit ---------------------------------------------------------------

def test_edge_fit_recovers_synthetic_profile():
    amp, center, width = 3e-4, 200.0, 20.0
    curve = exact_curve(lambda r: amp * np.array([math.erfc(x) for x in (r - center) / width]),
                        bins=120, r_max=320.0)
    fit = H.edge_profile_fit(curve, 190.0, 24.0)
    assert fit.center == pytest.approx(center, rel=1e-6)
    assert fit.width == pytest.approx(width, rel=1e-6)
    assert fit.amplitude == pytest.approx(amp, rel=1e-6)
    assert fit.residual < 1e-12
    assert H.edge_profile_fit(curve, 190.0, 24.0) == fit


def test_edge_fit_errors():
    curve = exact_curve(lambda r: np.zeros_like(r))
    with pytest.raises(H.FitError):
        H.edge_profile_fit(curve, 5.0, 1.0)
    with pytest.raises(H.FitError):
        H.edge_profile_fit(curve, 5.0, 0.0)
    with pytest.raises(H.FitError):
        H.edge_profile_fit(curve, 100.0, 0.1)


# --- figures ----------------------------------------------------------------

@pytest.fixture(scope="module")
def fig1(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig1")
    return out, H.reproduce_figure(1, SEED, out, workers=4)


@pytest.fixture(scope="module")
def fig2(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig2")
    return out, H.reproduce_figure(2, SEED, out, workers=4)


@pytest.fixture(scope="module")
def fig3(tmp_path_factory):
    out = tmp_path_factory.mktemp("fig3")
    return out, H.reproduce_figure(3, SEED, out, workers=4)


def test_figure1_outputs(fig1):
    out, meta = fig1
    for name in ("scatter.csv", "radial.csv", "overlay.csv", "meta.json"):
        assert (out / name).exists()
    saved = json.loads((out / "meta.json").read_text())
    assert saved["config"] == {"n": 10, "m": 105, "a2": 0.5, "a2_prime": 0.5, "trials": 500, "seed": SEED}
    assert saved["critical_radius"] == pytest.approx(61.64, abs=5e-3)
    assert saved["seed"] == SEED
    header = (out / "radial.csv").read_text().splitlines()[0]
    assert header == "r_lo,r_hi,density_emp,density_analytic"
    rows = np.loadtxt(out / "radial.csv", delimiter=",", skiprows=1)
    centers = 0.5 * (rows[:, 0] + rows[:, 1])
    assert np.allclose(rows[:, 3], A.density_regime1(10, 95, centers), rtol=1e-15)
    scatter = np.loadtxt(out / "scatter.csv", delimiter=",", skiprows=1)
    assert scatter.shape == (5000, 2)


def test_figure1_out_of_disk_fraction(fig1):
    _, meta = fig1
    f = meta["fraction_outside_critical"]
    assert f > 0
    half = H.binomial_halfwidth(FIG1_OUTSIDE_FIXTURE, FIG1_COUNT)
    assert abs(f - FIG1_OUTSIDE_FIXTURE) <= half


def test_figure2_edge_and_dispersion_contrast(fig1, fig2):
    _, m1 = fig1
    _, m2 = fig2
    assert m2["critical_radius"] == 200
    assert abs(m2["edge_fit"]["center"] - 200) <= 2 * math.sqrt(100)
    assert m2["fraction_inside_critical"] > m1["fraction_inside_critical"]


def test_figure2_distance_to_limit_law(fig2):
    _, meta = fig2
    assert meta["distances"]["regime"]["l1"] <= 0.05 * 100


def test_figure3_edge_centres(fig3):
    _, panels = fig3
    for q, meta in panels.items():
        assert abs(meta["edge_fit"]["center"] - 200 * math.sqrt(q + 1)) <= 3 * math.sqrt(100), q


def test_figure3_edge_width_q1(fig3):
    _, panels = fig3
    width = panels[1.0]["edge_fit"]["width"]
    target = math.sqrt(2 * 100 * 3)
    assert abs(width - target) <= 0.25 * target, f"fitted width {width:.3f} vs {target:.3f}"


def test_figure3_layout(fig3):
    out, _ = fig3
    for sub in ("q0.1", "q0.5", "q1"):
        assert (out / sub / "meta.json").exists()


def test_figure4_is_analytic(tmp_path):
    meta = H.reproduce_figure(4, SEED, tmp_path)
    rows = np.loadtxt(tmp_path / "radial.csv", delimiter=",", skiprows=1)
    assert meta["qs"] == [0.5, 1.0, 3.0] and rows.shape[1] == 4
    for j, q in enumerate((0.5, 1.0, 3.0)):
        assert np.allclose(rows[:, j + 1], A.density_regime3(100, q, rows[:, 0]), rtol=1e-15)
    assert not (tmp_path / "scatter.csv").exists()


def test_figure_is_bitwise_deterministic(tmp_path, fig1):
    out, _ = fig1
    H.reproduce_figure(1, SEED, tmp_path, workers=1)
    for name in ("scatter.csv", "radial.csv", "overlay.csv", "meta.json"):
        assert (out / name).read_bytes() == (tmp_path / name).read_bytes(), name


def test_figure_rejects_unknown_id_and_unwritable_dir(tmp_path):
    with pytest.raises(ValueError):
        H.reproduce_figure(5, SEED, tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        H.reproduce_figure(1, SEED, blocker / "sub", trials=2)


# --- Hermitian baseline -----------------------------------------------------

def test_mp_baseline(tmp_path):
    res = H.mp_baseline_run(200, 400, 50, SEED, tmp_path)
    assert res["l1"] <= 0.03 * 200
    assert res["fraction_within_edges"] >= 0.99
    assert res["fraction_within_bare_support"] >= 0.99
    assert (tmp_path / "histogram.csv").exists() and (tmp_path / "meta.json").exists()


def test_mp_baseline_hard_edge():
    res = H.mp_baseline_run(100, 100, 20, SEED)
    assert res["lambda_min"] == 0.0
    assert res["first_bin_is_max"]
