"""Time-series ingestion and cross-correlation denoising against the Wishart null.

Two panels of ``n`` channels observed at ``m`` common time points give the
non-Hermitian cross matrix ``C[a, b] = sum_t x_a(t) conj(y_b(t))``. After
standardizing every channel to mean 0 and population variance 1, the entries
match a null ensemble with ``a2 = a2' = 1``, so eigenvalues map to
standardized units by ``u = 2 w``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import _io
from .asymptotics import RegimeParams, critical_radius
from .ensemble import (DEFAULT_TOL, build_nh_wishart, eigvals_general, map_trials,
                       sample_complex_gaussian, sample_real_gaussian, trial_stream)

DEFAULT_THRESHOLD_K = 3.0
REGIME_II_FRACTION = 0.1
REAL_DATA_CAVEAT = (
    "input is real-valued: the analytic null edge and width come from the complex (beta = 2) "
    "theory, which does not describe real data; use the p-values, which come from a matched "
    "real-entry Monte Carlo null")


class TimeseriesFormatError(ValueError):
    """Malformed time-series CSV. ``row`` and ``column`` are 1-based file positions."""

    def __init__(self, message: str, path, row: int | None = None, column: int | None = None):
        where = f"{path}"
        if row is not None:
            where += f", row {row}"
        if column is not None:
            where += f", column {column}"
        super().__init__(f"{where}: {message}")
        self.path = str(path)
        self.row = row
        self.column = column


class RaggedRowError(TimeseriesFormatError):
    pass


class NonNumericCellError(TimeseriesFormatError):
    pass


class NonFiniteCellError(TimeseriesFormatError):
    pass


class TooFewPointsError(TimeseriesFormatError):
    pass


class ZeroVarianceError(ValueError):
    def __init__(self, channel: str):
        super().__init__(f"channel {channel!r} has zero variance and cannot be standardized")
        self.channel = channel


@dataclass(frozen=True)
class ChannelPanel:
    """``n`` channels by ``m`` time points; ``values[a, t]`` is channel ``a`` at time ``t``."""

    values: np.ndarray
    channel_names: tuple

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 1:
            raise ValueError(f"values must be a non-empty 2-D array, got shape {v.shape}")
        if len(self.channel_names) != v.shape[0]:
            raise ValueError("one name per channel required")
        if len(set(self.channel_names)) != len(self.channel_names):
            raise ValueError("channel names must be unique")
        if not np.all(np.isfinite(v)):
            raise ValueError("panel contains NaN or Inf")

    @property
    def channels(self) -> int:
        return self.values.shape[0]

    @property
    def length(self) -> int:
        return self.values.shape[1]

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)


def _parse_cell(text: str, path, row: int, col: int):
    s = text.strip()
    if not s:
        raise NonNumericCellError("empty cell", path, row, col)
    try:
        val = float(s)
    except ValueError:
        literal = s.replace(" ", "")
        if literal.endswith("i"):
            literal = literal[:-1] + "j"
        try:
            val = complex(literal) if literal.endswith("j") else None
        except ValueError:
            val = None
        if val is None:
            raise NonNumericCellError(f"not a number: {s!r}", path, row, col) from None
    if not (math.isfinite(val.real) and math.isfinite(val.imag)):
        raise NonFiniteCellError(f"non-finite value {s!r}", path, row, col)
    return val


def load_timeseries(path) -> ChannelPanel:
    """Read a CSV panel: a header of channel names, then one row per time point.

    Lines starting with ``#`` are ignored. Cells are real numbers or complex
    literals such as ``1.5+2i`` (``j`` is accepted too). Positions in error
    messages are file line numbers and 1-based columns.

    Raises
    ------
    RaggedRowError, NonNumericCellError, NonFiniteCellError, TooFewPointsError
        Each names the offending row and column where one exists.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc}") from exc
    numbered = [(i + 1, line) for i, line in enumerate(text.splitlines())
                if line.strip() and not line.lstrip().startswith("#")]
    if not numbered:
        raise TimeseriesFormatError("no header row", path)
    header_row, header_line = numbered[0]
    names = [s.strip() for s in next(csv.reader([header_line]))]
    if len(set(names)) != len(names):
        raise TimeseriesFormatError("duplicate channel names in header", path, header_row)
    rows = []
    any_complex = False
    for lineno, line in numbered[1:]:
        cells = next(csv.reader([line]))
        if len(cells) != len(names):
            raise RaggedRowError(f"expected {len(names)} cells, found {len(cells)}", path, lineno)
        vals = [_parse_cell(c, path, lineno, j + 1) for j, c in enumerate(cells)]
        any_complex = any_complex or any(isinstance(v, complex) for v in vals)
        rows.append(vals)
    if len(rows) < 2:
        raise TooFewPointsError(f"need at least 2 time points, found {len(rows)}", path)
    values = np.array(rows, dtype=complex if any_complex else float).T.copy()
    return ChannelPanel(values=values, channel_names=tuple(names))


def standardize_channels(panel: ChannelPanel) -> ChannelPanel:
    """Subtract each channel's mean and divide by its population standard deviation.

    The variance is ``mean(|x - mean x|^2)`` (divisor ``m``), which for complex
    data is the total variance of real and imaginary parts together.
    """
    if panel.length < 2:
        raise ValueError("standardization needs at least 2 time points")
    v = panel.values
    centred = v - v.mean(axis=1, keepdims=True)
    var = np.mean(np.abs(centred) ** 2, axis=1)
    scale = np.max(np.abs(v), axis=1)
    for name, s2, sc in zip(panel.channel_names, var, scale):
        if not s2 > (64 * np.finfo(float).eps * sc) ** 2:
            raise ZeroVarianceError(name)
    return replace(panel, values=centred / np.sqrt(var)[:, None])


def cross_matrix(x: ChannelPanel, y: ChannelPanel) -> np.ndarray:
    """``C[a, b] = sum_t x_a(t) conj(y_b(t))``."""
    if x.values.shape != y.values.shape:
        raise ValueError(f"panels differ in shape: {x.values.shape} vs {y.values.shape}")
    return build_nh_wishart(x.values, y.values)


@dataclass
class DenoiseReport:
    eigenvalues_std: np.ndarray
    null_edge: float
    null_width: float
    regime: str
    threshold_k: float
    p_values: np.ndarray
    flags: np.ndarray
    null_trials: int
    data_kind: str
    false_positive_rate: float
    config: dict = field(default_factory=dict)
    caveats: list = field(default_factory=list)

    @property
    def threshold(self) -> float:
        return self.null_edge + self.threshold_k * self.null_width

    def to_dict(self) -> dict:
        eig = [{"re": float(u.real), "im": float(u.imag), "abs": float(abs(u)),
                "p_value": float(p), "flagged": bool(f)}
               for u, p, f in zip(self.eigenvalues_std, self.p_values, self.flags)]
        return {
            "config": self.config,
            "eigenvalues": eig,
            "null": {"edge": self.null_edge, "width": self.null_width, "regime": self.regime,
                     "trials": self.null_trials, "threshold_k": self.threshold_k,
                     "threshold": self.threshold,
                     "false_positive_rate": self.false_positive_rate},
            "caveats": list(self.caveats),
        }


def null_edge_width(n: int, m: int, regime: str | None = None) -> tuple[str, float, float]:
    """Analytic null edge and erfc width; Regime II when ``nu < 0.1 n`` unless overridden."""
    nu = m - n
    if regime is None:
        regime = "II" if nu < REGIME_II_FRACTION * n else "III"
    if regime == "II":
        return "II", critical_radius(RegimeParams("II", n, nu=nu)), 2.0 * math.sqrt(n)
    if regime == "III":
        if nu <= 0:
            raise ValueError("Regime III needs m > n")
        q = nu / n
        return "III", critical_radius(RegimeParams.regime3(n, q)), math.sqrt(2.0 * n * (q + 2.0))
    raise ValueError(f"regime must be 'II' or 'III', got {regime!r}")


def _standardized_values(values):
    centred = values - values.mean(axis=1, keepdims=True)
    return centred / np.sqrt(np.mean(np.abs(centred) ** 2, axis=1))[:, None]


def null_moduli(n: int, m: int, trials: int, seed: int, real: bool = False,
                workers: int = 1) -> np.ndarray:
    """Sorted-per-trial ``|u|`` of the matched null, shape ``(trials, n)``.

    Each trial draws two iid Gaussian panels, standardizes them exactly as the
    data are standardized, and diagonalises their cross matrix.
    """
    draw = sample_real_gaussian if real else sample_complex_gaussian

    def one(t):
        stream = trial_stream(seed, t)
        x = _standardized_values(draw(n, m, 1.0, stream))
        y = _standardized_values(draw(n, m, 1.0, stream))
        eig = eigvals_general(build_nh_wishart(x, y), DEFAULT_TOL, trial=t, seed=seed)
        return np.sort(2.0 * np.abs(eig))

    return np.stack(map_trials(one, trials, workers))


def denoise_panels(x: ChannelPanel, y: ChannelPanel, null_trials: int, seed: int,
                   threshold_k: float = DEFAULT_THRESHOLD_K, regime: str | None = None,
                   workers: int = 1) -> DenoiseReport:
    """Spectrum of the standardized cross matrix tested against the null ensemble."""
    if x.values.shape != y.values.shape:
        raise ValueError(f"panels differ in shape: {x.values.shape} vs {y.values.shape}")
    n, m = x.channels, x.length
    if m < n:
        raise ValueError(f"m={m} time points < n={n} channels: only m >= n is supported")
    if null_trials < 1:
        raise ValueError("null_trials must be positive")
    if not threshold_k >= 0:
        raise ValueError("threshold_k must be nonnegative")
    real = not (x.is_complex or y.is_complex)
    xs, ys = standardize_channels(x), standardize_channels(y)
    u = 2.0 * eigvals_general(cross_matrix(xs, ys), DEFAULT_TOL)
    u = u[np.lexsort((u.imag, u.real, -np.abs(u)))]
    override = regime
    regime, edge, width = null_edge_width(n, m, regime)
    threshold = edge + threshold_k * width
    null = null_moduli(n, m, null_trials, seed, real=real, workers=workers)
    maxima = null[:, -1]
    p = np.array([np.count_nonzero(maxima >= abs(v)) / null_trials for v in u])
    flags = np.abs(u) > threshold
    fp_rate = float(np.count_nonzero(null > threshold)) / null_trials
    config = {"n": n, "m": m, "nu": m - n, "null_trials": null_trials, "seed": seed,
              "threshold_k": threshold_k, "data_kind": "real" if real else "complex",
              "regime_override": override,
              "x_channels": list(x.channel_names), "y_channels": list(y.channel_names)}
    caveats = [REAL_DATA_CAVEAT] if real else []
    return DenoiseReport(eigenvalues_std=u, null_edge=edge, null_width=width, regime=regime,
                         threshold_k=threshold_k, p_values=p, flags=flags, null_trials=null_trials,
                         data_kind="real" if real else "complex", false_positive_rate=fp_rate,
                         config=config, caveats=caveats)


def denoise(x_path, y_path, null_trials: int, seed: int, threshold_k: float = DEFAULT_THRESHOLD_K,
            out_path=None, regime: str | None = None, workers: int = 1) -> DenoiseReport:
    """Load two panels, run :func:`denoise_panels` and write the JSON report to ``out_path``."""
    report = denoise_panels(load_timeseries(x_path), load_timeseries(y_path), null_trials, seed,
                            threshold_k, regime, workers)
    report.config["x_path"] = str(x_path)
    report.config["y_path"] = str(y_path)
    if out_path is not None:
        _io.write_json(out_path, report.to_dict())
    return report
