"""Monte Carlo experiments: radial histograms, comparisons with the analytic laws,
edge fits, figure data and the Hermitian Marchenko-Pastur baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import _io, asymptotics, finite_n
from ._accel import backend
from .ensemble import EnsembleConfig, SpectrumSample, sample_hermitian_spectra, sample_spectrum

DEFAULT_BINS = 80
RMAX_FACTOR = 1.3
FIT_MAX_ITER = 100


class FitError(RuntimeError):
    pass


@dataclass
class RadialDensityCurve:
    """Eigenvalues per unit area per matrix, binned in ``|u|``."""

    bin_edges: np.ndarray
    density: np.ndarray
    counts: np.ndarray
    trials: int
    n: int
    out_of_range: int = 0

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[1:] + self.bin_edges[:-1])

    @property
    def areas(self) -> np.ndarray:
        return math.pi * np.diff(self.bin_edges ** 2)

    def total_mass(self) -> float:
        """In-range eigenvalues per matrix."""
        return float(np.sum(self.density * self.areas))


@dataclass(frozen=True)
class EdgeFit:
    center: float
    width: float
    amplitude: float
    residual: float
    iterations: int


def radial_histogram_moduli(moduli, n: int, trials: int, bins: int, r_max: float) -> RadialDensityCurve:
    if not r_max > 0:
        raise ValueError("r_max must be positive")
    moduli = np.asarray(moduli, dtype=float)
    edges = np.linspace(0.0, r_max, bins + 1)
    counts, _ = np.histogram(moduli, bins=edges)
    outside = int(np.count_nonzero(moduli > r_max))
    density = counts / (trials * math.pi * np.diff(edges ** 2))
    return RadialDensityCurve(edges, density, counts, trials, n, outside)


def radial_histogram(sample: SpectrumSample, bins: int = DEFAULT_BINS, r_max: float | None = None) -> RadialDensityCurve:
    """Histogram of standardized ``|u|``; eigenvalues beyond ``r_max`` are tallied in ``out_of_range``."""
    if r_max is None:
        r_max = float(sample.moduli.max()) * (1 + 1e-12)
    return radial_histogram_moduli(sample.moduli, sample.config.n, sample.config.trials, bins, r_max)


def curve_distance(curve: RadialDensityCurve, analytic: Callable, window: tuple[float, float],
                   floor: float | None = None) -> tuple[float, float]:
    """Mass-weighted L1 distance and sup relative error over bins centred in ``window``.

    ``l1 = sum |rho_hat - rho(rbar)| 2 pi rbar dr``. ``sup_rel`` skips bins whose
    analytic value is below ``floor`` (default: 1e-3 of its maximum in the window).
    """
    r_lo, r_hi = window
    c = curve.centers
    sel = (c >= r_lo) & (c <= r_hi)
    if not np.any(sel):
        raise ValueError(f"window {window} contains no bin centres")
    rbar = c[sel]
    dr = np.diff(curve.bin_edges)[sel]
    rho = np.asarray(analytic(rbar), dtype=float)
    emp = curve.density[sel]
    l1 = float(np.sum(np.abs(emp - rho) * 2.0 * math.pi * rbar * dr))
    cut = 1e-3 * float(np.max(rho)) if floor is None else floor
    keep = rho > cut
    sup_rel = float(np.max(np.abs(emp[keep] / rho[keep] - 1.0))) if np.any(keep) else 0.0
    return l1, sup_rel


def fraction_outside(sample: SpectrumSample, radius: float) -> float:
    return float(np.mean(sample.moduli > radius))


def binomial_halfwidth(p: float, count: int, z: float = 1.96) -> float:
    return z * math.sqrt(max(p * (1.0 - p), 0.0) / count)


def _erfc_model(r, amp, center, width):
    return amp * np.array([math.erfc(x) for x in (r - center) / width])


def edge_profile_fit(curve: RadialDensityCurve, guess_center: float, guess_width: float) -> EdgeFit:
    """Least-squares fit of ``A erfc((r - c)/s)`` on ``guess_center +- 3 guess_width``.

    Gauss-Newton with a forward-difference Jacobian and step halving, starting
    from the guesses (amplitude from the inner edge of the window), capped at
    100 iterations.
    """
    if not guess_width > 0:
        raise FitError("guess_width must be positive")
    lo, hi = guess_center - 3 * guess_width, guess_center + 3 * guess_width
    c = curve.centers
    sel = (c >= lo) & (c <= hi)
    if np.count_nonzero(sel) < 4:
        raise FitError(f"degenerate window [{lo:.4g}, {hi:.4g}]: fewer than 4 bins")
    r = c[sel]
    y = curve.density[sel]
    if not np.any(y > 0):
        raise FitError("no eigenvalues inside the fit window")
    inner = y[: max(1, r.size // 6)]
    theta = np.array([0.5 * float(np.mean(inner)) or float(np.max(y)), guess_center, guess_width])

    def resid(p):
        return _erfc_model(r, *p) - y

    cost = float(np.sum(resid(theta) ** 2))
    for it in range(1, FIT_MAX_ITER + 1):
        res = resid(theta)
        jac = np.empty((r.size, 3))
        for j in range(3):
            h = 1e-7 * max(abs(theta[j]), 1e-12)
            tp = theta.copy()
            tp[j] += h
            jac[:, j] = (resid(tp) - res) / h
        step, *_ = np.linalg.lstsq(jac, -res, rcond=None)
        t = 1.0
        while True:
            trial = theta + t * step
            if trial[2] > 0:
                trial_cost = float(np.sum(resid(trial) ** 2))
                if trial_cost <= cost:
                    break
            t *= 0.5
            if t < 1e-10:
                break
        if t < 1e-10:
            # no descent direction left: converged to machine precision
            return EdgeFit(theta[1], theta[2], theta[0], math.sqrt(cost / r.size), it)
        converged = np.all(np.abs(t * step) <= 1e-10 * (np.abs(theta) + 1e-12))
        theta, cost = trial, trial_cost
        if converged:
            return EdgeFit(theta[1], theta[2], theta[0], math.sqrt(cost / r.size), it)
    raise FitError(f"edge fit did not converge in {FIT_MAX_ITER} iterations")


# ---------------------------------------------------------------------------
# Figure reproduction
# ---------------------------------------------------------------------------

FIGURES = {
    1: {"regime": "I", "n": 10, "nus": (95,), "trials": 500},
    2: {"regime": "II", "n": 100, "nus": (1,), "trials": 100},
    3: {"regime": "III", "n": 100, "qs": (0.1, 0.5, 1.0), "trials": 100},
    4: {"regime": "III", "n": 100, "qs": (0.5, 1.0, 3.0), "trials": 0},
}


def _regime_overlay(params: asymptotics.RegimeParams):
    if params.regime == "I":
        return lambda r: asymptotics.density_regime1(params.n, int(params.nu), r)
    if params.regime == "II":
        return lambda r: asymptotics.density_regime2(params.n, int(params.nu), r)
    return lambda r: asymptotics.density_regime3(params.n, params.q, r)


def _panel_params(setup, nu=None, q=None):
    if setup["regime"] == "III":
        return asymptotics.RegimeParams.regime3(setup["n"], q)
    return asymptotics.RegimeParams(setup["regime"], setup["n"], nu=nu)


def run_panel(params: asymptotics.RegimeParams, trials: int, seed: int, out_dir, bins: int = DEFAULT_BINS,
              workers: int = 1, fit_edge: bool = True) -> dict:
    """Sample one configuration, write scatter/radial/overlay CSVs and meta.json."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out_dir}: {exc}") from exc
    n = params.n
    nu = int(round(params.nu))
    config = EnsembleConfig(n=n, m=n + nu, trials=trials, seed=seed)
    sample = sample_spectrum(config, workers=workers)
    r_c = asymptotics.critical_radius(params)
    r_max = RMAX_FACTOR * r_c
    curve = radial_histogram(sample, bins=bins, r_max=r_max)
    overlay = _regime_overlay(params)

    def exact(r):
        return finite_n.mean_density_radial(n, nu, np.maximum(r, 1e-300))

    u = sample.flat()
    _io.write_csv(out_dir / "scatter.csv", ["re", "im"], [u.real, u.imag])
    _io.write_csv(out_dir / "radial.csv", ["r_lo", "r_hi", "density_emp", "density_analytic"],
                  [curve.bin_edges[:-1], curve.bin_edges[1:], curve.density, overlay(curve.centers)])
    grid = np.linspace(r_max / 400, r_max, 400)
    _io.write_csv(out_dir / "overlay.csv", ["r", "density_regime", "density_exact"],
                  [grid, overlay(grid), exact(grid)])

    window = (0.0, r_max)
    l1_regime, sup_regime = curve_distance(curve, overlay, window)
    l1_exact, sup_exact = curve_distance(curve, exact, window)
    meta = {
        "config": config.to_dict(),
        "regime": params.regime,
        "nu": nu,
        "q": params.q,
        "seed": seed,
        "backend": backend(),
        "critical_radius": r_c,
        "bins": bins,
        "r_max": r_max,
        "out_of_range": curve.out_of_range,
        "fraction_outside_critical": fraction_outside(sample, r_c),
        "fraction_inside_critical": 1.0 - fraction_outside(sample, r_c),
        "max_solver_residual": float(np.max(sample.solver_residuals)),
        "distances": {"regime": {"l1": l1_regime, "sup_rel": sup_regime},
                      "exact": {"l1": l1_exact, "sup_rel": sup_exact}},
    }
    if fit_edge and params.regime in ("II", "III"):
        width = 2 * math.sqrt(n) if params.regime == "II" else math.sqrt(2 * n * (params.q + 2))
        try:
            fit = edge_profile_fit(curve, r_c, width)
            meta["edge_fit"] = {"center": fit.center, "width": fit.width, "amplitude": fit.amplitude,
                                "residual": fit.residual, "iterations": fit.iterations}
        except FitError as exc:
            meta["edge_fit"] = {"error": str(exc)}
    _io.write_json(out_dir / "meta.json", meta)
    meta["curve"] = curve
    meta["sample"] = sample
    return meta


def analytic_profiles(n: int, qs, out_dir, points: int = 400) -> dict:
    """Regime III profiles for several ``q`` on a shared grid (no sampling)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    r_max = RMAX_FACTOR * 2 * n * math.sqrt(max(qs) + 1)
    grid = np.linspace(0.0, r_max, points)
    cols = [asymptotics.density_regime3(n, q, grid) for q in qs]
    header = ["r"] + [f"density_q{q:g}" for q in qs]
    _io.write_csv(out_dir / "radial.csv", header, [grid] + cols)
    meta = {"n": n, "qs": list(qs),
            "critical_radii": [2 * n * math.sqrt(q + 1) for q in qs],
            "r_max": r_max, "points": points}
    _io.write_json(out_dir / "meta.json", meta)
    return meta


def reproduce_figure(figure: int, seed: int, out_dir, trials: int | None = None, workers: int = 1,
                     bins: int = DEFAULT_BINS) -> dict:
    """Write the data behind one of the four figures.

    Figures 1 and 2 write into ``out_dir``; figure 3 writes one subdirectory
    per ``q`` (``q0.1``, ``q0.5``, ``q1``); figure 4 is analytic only.
    Returns the run metadata (panels keyed by ``q`` for figure 3).
    """
    if figure not in FIGURES:
        raise ValueError(f"figure must be one of {sorted(FIGURES)}, got {figure}")
    setup = FIGURES[figure]
    out_dir = Path(out_dir)
    if figure == 4:
        return analytic_profiles(setup["n"], setup["qs"], out_dir)
    ntrials = setup["trials"] if trials is None else trials
    if figure in (1, 2):
        params = _panel_params(setup, nu=setup["nus"][0])
        return run_panel(params, ntrials, seed, out_dir, bins=bins, workers=workers)
    panels = {}
    for q in setup["qs"]:
        params = _panel_params(setup, q=q)
        panels[q] = run_panel(params, ntrials, seed, out_dir / f"q{q:g}", bins=bins, workers=workers)
    return panels


# ---------------------------------------------------------------------------
# Hermitian baseline
# ---------------------------------------------------------------------------

def edge_scale(n: int, m: int) -> tuple[float, float]:
    """Soft-edge fluctuation scales at ``lambda_min`` and ``lambda_max`` (a = 1, complex entries)."""
    sn, sm = math.sqrt(n), math.sqrt(m)
    upper = (sm + sn) * (1 / sn + 1 / sm) ** (1 / 3)
    lower = (sm - sn) * abs(1 / sn - 1 / sm) ** (1 / 3) if m > n else 0.0
    return lower, upper


def mp_baseline_run(n: int, m: int, trials: int, seed: int, out_dir=None, bins: int = 60,
                    workers: int = 1) -> dict:
    """Hermitian Wishart spectra (beta = 2, a = 1) against the Marchenko-Pastur law.

    The L1 distance compares each bin with the analytic mass of that bin
    divided by its width (Gauss-Legendre on the bin, square-root edges
    included), in eigenvalues per matrix.
    """
    lam = sample_hermitian_spectra(n, m, trials, seed, workers=workers).ravel()
    lo, hi = asymptotics.mp_endpoints(n, m)
    s_lo, s_hi = edge_scale(n, m)
    edges = np.linspace(0.0 if lo == 0 else max(0.0, lo - 3 * s_lo), hi + 3 * s_hi, bins + 1)
    counts, _ = np.histogram(lam, bins=edges)
    width = np.diff(edges)
    emp = counts / (trials * width)
    x, w = np.polynomial.legendre.leggauss(40)
    mids = 0.5 * (edges[1:] + edges[:-1])
    nodes = mids[:, None] + 0.5 * width[:, None] * x[None, :]
    ana = (asymptotics.mp_density(nodes, n, m) * w[None, :]).sum(axis=1) * 0.5
    l1 = float(np.sum(np.abs(emp - ana) * width))
    inside = float(np.mean((lam >= lo - 3 * s_lo) & (lam <= hi + 3 * s_hi)))
    result = {
        "n": n, "m": m, "trials": trials, "seed": seed, "backend": backend(),
        "lambda_min": lo, "lambda_max": hi, "edge_scale": [s_lo, s_hi],
        "l1": l1, "fraction_within_edges": inside,
        "fraction_within_bare_support": float(np.mean((lam >= lo) & (lam <= hi))),
        "first_bin_is_max": bool(np.argmax(emp) == 0),
    }
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        _io.write_csv(out_dir / "histogram.csv", ["lam_lo", "lam_hi", "density_emp", "density_analytic"],
                      [edges[:-1], edges[1:], emp, ana])
        _io.write_json(out_dir / "meta.json", result)
    result["histogram"] = (edges, emp, ana)
    return result
