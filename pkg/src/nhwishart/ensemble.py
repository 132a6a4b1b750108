"""Sampling the non-Hermitian Wishart ensemble ``W = X Y^H`` and its Hermitian baseline.

Matrices are plain ``complex128`` numpy arrays. Each trial draws from its own
counter-based stream keyed by ``(seed, trial)``, so a sample does not depend on
how trials are scheduled across threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels

DEFAULT_TOL = 1e-10
MAX_SWEEPS = 60


class ConvergenceError(RuntimeError):
    """The shifted QR iteration exceeded its sweep budget."""

    def __init__(self, message: str, trial: int | None = None, seed: int | None = None):
        super().__init__(message)
        self.trial = trial
        self.seed = seed


@dataclass(frozen=True)
class EnsembleConfig:
    n: int
    m: int
    a2: float = 0.5
    a2_prime: float = 0.5
    trials: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.trials < 1:
            raise ValueError("n and trials must be positive")
        if self.m < self.n:
            raise ValueError(f"m={self.m} < n={self.n}: only the Wishart domain m >= n is supported")
        if not (self.a2 > 0 and self.a2_prime > 0):
            raise ValueError("scale parameters a2, a2_prime must be positive")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    @property
    def nu(self) -> int:
        return self.m - self.n

    @property
    def standardization(self) -> float:
        """Factor ``2 sqrt(a2 a2')`` mapping raw eigenvalues to standardized units."""
        return 2.0 * math.sqrt(self.a2 * self.a2_prime)

    def to_dict(self) -> dict:
        return {"n": self.n, "m": self.m, "a2": self.a2, "a2_prime": self.a2_prime,
                "trials": self.trials, "seed": self.seed}


@dataclass
class SpectrumSample:
    """Standardized eigenvalues, one row of ``n`` per trial."""

    config: EnsembleConfig
    eigenvalues: np.ndarray
    solver_residuals: np.ndarray = field(repr=False)

    def flat(self) -> np.ndarray:
        return self.eigenvalues.ravel()

    @property
    def moduli(self) -> np.ndarray:
        return np.abs(self.eigenvalues.ravel())


def trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Philox4x64 generator keyed by ``(seed, trial)``, counter starting at zero."""
    key = np.array([seed, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _box_muller(stream, shape):
    u1 = 1.0 - stream.random(shape)  # (0, 1]
    u2 = stream.random(shape)
    return np.sqrt(-2.0 * np.log(u1)), 2.0 * np.pi * u2


def sample_complex_gaussian(n: int, m: int, a: float, stream: np.random.Generator) -> np.ndarray:
    """``n x m`` complex matrix with entry density proportional to ``exp(-a |x|^2)``.

    Real and imaginary parts are independent with variance ``1/(2a)``; one
    Box-Muller pair supplies each entry.
    """
    if not a > 0:
        raise ValueError(f"scale a must be positive, got {a}")
    r, theta = _box_muller(stream, (n, m))
    r *= 1.0 / math.sqrt(2.0 * a)
    return r * np.cos(theta) + 1j * (r * np.sin(theta))


def sample_real_gaussian(n: int, m: int, a: float, stream: np.random.Generator) -> np.ndarray:
    """Real ``n x m`` matrix with entry density proportional to ``exp(-a x^2)`` (as complex dtype)."""
    if not a > 0:
        raise ValueError(f"scale a must be positive, got {a}")
    r, theta = _box_muller(stream, (n, m))
    return (r * np.cos(theta) / math.sqrt(2.0 * a)).astype(np.complex128)


def _as_complex(x, name):
    arr = np.ascontiguousarray(x, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite entries")
    return arr


def build_nh_wishart(x, y) -> np.ndarray:
    """``W[a, b] = sum_j x[a, j] * conj(y[b, j])``."""
    x = _as_complex(x, "X")
    y = _as_complex(y, "Y")
    if x.shape != y.shape:
        raise ValueError(f"X and Y must have equal shapes, got {x.shape} and {y.shape}")
    return _kernels.cross_product(x, y)


def build_h_wishart(x) -> np.ndarray:
    """Hermitian ``X X^H``, symmetrized so it equals its conjugate transpose bitwise."""
    x = _as_complex(x, "X")
    w = _kernels.cross_product(x, x)
    return 0.5 * (w + w.conj().T)


def eigvals_general(m, tol: float = DEFAULT_TOL, trial: int | None = None,
                    seed: int | None = None) -> np.ndarray:
    """Eigenvalues of a general complex square matrix.

    Householder reduction to Hessenberg form, then single-shift QR with
    Wilkinson shifts and at most ``MAX_SWEEPS`` sweeps per deflation.

    Raises
    ------
    ConvergenceError
        If the sweep budget is exhausted or the trace identities
        ``sum(lambda) = tr M`` and ``sum(lambda^2) = tr M^2`` fail by more
        than ``tol`` relative to the Frobenius norm.
    """
    a = _as_complex(m, "M")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got {a.shape}")
    eig, status = _kernels.eigvals_kernel(a, MAX_SWEEPS)
    if status != _kernels.STATUS_OK:
        raise ConvergenceError(f"QR iteration did not converge (trial={trial}, seed={seed})",
                               trial=trial, seed=seed)
    fro = np.linalg.norm(a)
    if fro > 0:
        res = max(abs(eig.sum() - np.trace(a)) / fro, abs((eig * eig).sum() - np.trace(a @ a)) / fro**2)
        if res > tol:
            raise ConvergenceError(f"eigenvalue residual {res:.3e} exceeds tol {tol:.1e} "
                                   f"(trial={trial}, seed={seed})", trial=trial, seed=seed)
    return eig


def eigvals_hermitian(w) -> np.ndarray:
    return np.linalg.eigvalsh(_as_complex(w, "W"))


def _wishart_trial(config: EnsembleConfig, trial: int, tol: float, real: bool = False):
    stream = trial_stream(config.seed, trial)
    draw = sample_real_gaussian if real else sample_complex_gaussian
    x = draw(config.n, config.m, config.a2, stream)
    y = draw(config.n, config.m, config.a2_prime, stream)
    eig, status, res = _kernels.wishart_trial(x, y, MAX_SWEEPS)
    if status != _kernels.STATUS_OK or not res <= tol:
        raise ConvergenceError(f"eigenvalue solve failed (trial={trial}, seed={config.seed}, "
                               f"residual={res:.3e})", trial=trial, seed=config.seed)
    return eig, res


def map_trials(func, trials: int, workers: int = 1) -> list:
    """``[func(t) for t in range(trials)]``, optionally on a thread pool.

    Results come back in trial order whatever the schedule; the numba kernels
    release the GIL so threads give real parallelism.
    """
    if workers <= 1 or trials <= 1:
        return [func(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, range(trials)))


def sample_spectrum(config: EnsembleConfig, tol: float = DEFAULT_TOL, workers: int = 1,
                    real: bool = False) -> SpectrumSample:
    """Draw ``config.trials`` matrices and return their standardized spectra.

    ``real=True`` draws real-valued panels (the beta=1 analogue); it exists for
    the denoising null model and is not covered by the analytic formulas.
    """
    results = map_trials(lambda t: _wishart_trial(config, t, tol, real), config.trials, workers)
    eig = np.stack([r[0] for r in results]) * config.standardization
    res = np.array([r[1] for r in results])
    return SpectrumSample(config=config, eigenvalues=eig, solver_residuals=res)


def sample_hermitian_spectra(n: int, m: int, trials: int, seed: int, a: float = 1.0,
                             workers: int = 1) -> np.ndarray:
    """Eigenvalues of ``X X^H`` with entry density ``exp(-a|x|^2)``, shape ``(trials, n)``."""
    if m < n:
        raise ValueError(f"m={m} < n={n}: only m >= n is supported")

    def one(t):
        x = sample_complex_gaussian(n, m, a, trial_stream(seed, t))
        return eigvals_hermitian(build_h_wishart(x))

    return np.stack(map_trials(one, trials, workers))
