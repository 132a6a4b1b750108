"""Spectra of non-Hermitian Wishart matrices ``W = X Y^H``.

Modules
-------
specfun      Bessel, Gamma and erfc special functions in log space.
ensemble     Reproducible sampling of complex Gaussian panels and their spectra.
finite_n     Exact finite-``n`` kernel, densities and correlation functions.
asymptotics  Large-``n`` limit laws, the Coulomb-fluid predictor and the MP baseline.
harness      Monte Carlo histograms, edge fits and figure data.
ingest       Time-series loading and cross-correlation denoising.
cli          The ``nhwishart`` command.

Set ``NHWISHART_DISABLE_JIT=1`` before import to run the pure-numpy kernels.
"""

from ._accel import backend
from .asymptotics import (RegimeParams, coulomb_density, coulomb_edge, critical_radius,
                          density_regime1, density_regime2, density_regime3, mp_density,
                          mp_endpoints)
from .ensemble import (ConvergenceError, EnsembleConfig, SpectrumSample, eigvals_general,
                       sample_spectrum)
from .finite_n import (KernelContext, OriginSingularityWarning, correlation_fn, jpdf_log, kernel,
                       mean_density_exact)
from .harness import (EdgeFit, RadialDensityCurve, curve_distance, edge_profile_fit,
                      fraction_outside, mp_baseline_run, radial_histogram, reproduce_figure)
from .ingest import ChannelPanel, DenoiseReport, denoise, load_timeseries

__version__ = "0.1.0"

__all__ = [
    "backend", "RegimeParams", "coulomb_density", "coulomb_edge", "critical_radius",
    "density_regime1", "density_regime2", "density_regime3", "mp_density", "mp_endpoints",
    "ConvergenceError", "EnsembleConfig", "SpectrumSample", "eigvals_general", "sample_spectrum",
    "KernelContext", "OriginSingularityWarning", "correlation_fn", "jpdf_log", "kernel",
    "mean_density_exact", "EdgeFit", "RadialDensityCurve", "curve_distance", "edge_profile_fit",
    "fraction_outside", "mp_baseline_run", "radial_histogram", "reproduce_figure",
    "ChannelPanel", "DenoiseReport", "denoise", "load_timeseries",
]
