r"""Exact finite-``n`` eigenvalue statistics of ``W = X Y^H`` (beta = 2).

All formulas are in standardized units, ``a2 * a2' = 1/4``, where the
eigenvalue weight is :math:`|w|^\nu K_\nu(|w|)` and ``nu = m - n``. The kernel is

.. math::
    \mathbb K_{n,m}(w, w') = \frac{|w w'|^{\nu/2}}{2^{\nu+1}\pi}
        \sqrt{K_\nu(|w|) K_\nu(|w'|)}
        \sum_{k=0}^{n-1} \frac{(w w')^k}{2^{2k} k! (k+\nu)!}

and every correlation function is a determinant of it. Sums are carried as
log-sum-exp: at ``n = 100`` and ``|w| = 200`` the largest term of the sum
exceeds ``1e170`` while ``K_nu(|w|)`` is near ``exp(-200)``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import specfun

LOG2 = math.log(2.0)
LOGPI = math.log(math.pi)
ORIGIN_CUTOFF = 1e-12


class OriginSingularityWarning(RuntimeWarning):
    """The nu = 0 density diverges logarithmically at the origin; ``inf`` returned."""


def _warn_origin():
    warnings.warn("nu = 0 density is log-singular at the origin; returning inf",
                  OriginSingularityWarning, stacklevel=3)


@dataclass(frozen=True)
class KernelContext:
    """Precomputed ``log(1 / (4^k k! (k+nu)!))`` for ``k < n``."""

    n: int
    nu: int
    log_term_coeffs: np.ndarray

    @classmethod
    def build(cls, n: int, nu: int) -> "KernelContext":
        _check_n_nu(n, nu)
        k = np.arange(n, dtype=float)
        lg = np.array([math.lgamma(i + 1.0) + math.lgamma(i + nu + 1.0) for i in range(n)])
        coeffs = -2.0 * k * LOG2 - lg
        coeffs.setflags(write=False)
        return cls(n=n, nu=nu, log_term_coeffs=coeffs)


def _check_n_nu(n, nu):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if int(nu) != nu or nu < 0:
        raise ValueError(f"nu must be a nonnegative integer, got {nu}")


def _logsumexp_rows(a):
    peak = np.max(a, axis=0)
    return peak + np.log(np.sum(np.exp(a - peak), axis=0))


def log_f_series(n: int, nu: int, rho):
    r"""``log F_{n,nu}(rho)`` with ``F = sum_{k<n} (rho/2)^{2k} / (k! (k+nu)!)``.

    Accepts a scalar or an array of ``rho >= 0``.
    """
    ctx = KernelContext.build(n, nu)
    rho_arr = np.atleast_1d(np.asarray(rho, dtype=float))
    if np.any(rho_arr < 0):
        raise ValueError("rho must be nonnegative")
    k = np.arange(n, dtype=float)[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        logr = np.log(rho_arr)
        terms = ctx.log_term_coeffs[:, None] + np.where(k > 0, 2.0 * k * logr[None, :], 0.0)
    out = _logsumexp_rows(terms)
    return float(out[0]) if np.ndim(rho) == 0 else out


f_series = log_f_series


def log_weight(nu: int, r):
    """``log(r^nu K_nu(r))``; at ``r = 0`` the limit ``log(Gamma(nu) 2^(nu-1))`` for ``nu > 0``."""
    r_arr = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty(r_arr.shape)
    pos = r_arr > 0
    if np.any(pos):
        out[pos] = nu * np.log(r_arr[pos]) + specfun.log_bessel_k_array(nu, r_arr[pos])
    if np.any(~pos):
        out[~pos] = math.lgamma(nu) + (nu - 1) * LOG2 if nu > 0 else math.inf
    return float(out[0]) if np.ndim(r) == 0 else out


def log_mean_density_radial(n: int, nu: int, r):
    """Log of the exact mean density at modulus ``r`` (``inf`` at the origin for ``nu = 0``)."""
    _check_n_nu(n, nu)
    return -(nu + 1) * LOG2 - LOGPI + log_weight(nu, r) + log_f_series(n, nu, r)


def mean_density_radial(n: int, nu: int, r) -> np.ndarray:
    """Vectorised exact mean density over moduli ``r``; see :func:`mean_density_exact`."""
    r = np.asarray(r, dtype=float)
    small = r < ORIGIN_CUTOFF
    if nu == 0 and np.any(small):
        _warn_origin()
        out = np.full(r.shape, math.inf)
        if np.any(~small):
            out[~small] = np.exp(log_mean_density_radial(n, nu, r[~small]))
        return out
    return np.exp(log_mean_density_radial(n, nu, r))


def mean_density_exact(n: int, nu: int, w) -> float:
    r"""Mean eigenvalue density :math:`R^{(1)}_{n,m}(w) = \mathbb K(w, \bar w)`.

    Depends on ``|w|`` only. For ``nu = 0`` and ``|w| < 1e-12`` the
    logarithmic singularity is reported as ``inf`` with an
    :class:`OriginSingularityWarning` rather than an exception.
    """
    r = abs(complex(w))
    if nu == 0 and r < ORIGIN_CUTOFF:
        _check_n_nu(n, nu)
        _warn_origin()
        return math.inf
    return math.exp(log_mean_density_radial(n, nu, r))


def _log_point_weight(nu, r):
    if r == 0.0 and nu == 0:
        raise ValueError("kernel is not defined at w = 0 when nu = 0 (log-singular weight)")
    return log_weight(nu, r)


def kernel(ctx: KernelContext, w: complex, w_prime: complex) -> complex:
    """Scalar kernel ``K_{n,m}(w, w')``."""
    w = complex(w)
    w_prime = complex(w_prime)
    log_pref = (-(ctx.nu + 1) * LOG2 - LOGPI
                + 0.5 * (_log_point_weight(ctx.nu, abs(w)) + _log_point_weight(ctx.nu, abs(w_prime))))
    z = w * w_prime
    if z == 0:
        return math.exp(log_pref + ctx.log_term_coeffs[0]) + 0j
    k = np.arange(ctx.n)
    a = ctx.log_term_coeffs + k * math.log(abs(z))
    peak = float(np.max(a))
    s = np.sum(np.exp(a - peak) * np.exp(1j * k * np.angle(z)))
    return complex(math.exp(log_pref + peak) * s)


def kernel_row(ctx: KernelContext, w: complex, points) -> np.ndarray:
    """``K(w, conj(xi))`` for every ``xi`` in ``points``; vectorised form of :func:`kernel`."""
    w = complex(w)
    xi = np.asarray(points, dtype=complex).ravel()
    r_xi = np.abs(xi)
    if ctx.nu == 0 and (abs(w) == 0.0 or np.any(r_xi == 0.0)):
        raise ValueError("kernel is not defined at w = 0 when nu = 0 (log-singular weight)")
    log_pref = (-(ctx.nu + 1) * LOG2 - LOGPI
                + 0.5 * (log_weight(ctx.nu, abs(w)) + np.atleast_1d(log_weight(ctx.nu, r_xi))))
    z = w * np.conj(xi)
    k = np.arange(ctx.n)[:, None]
    with np.errstate(divide="ignore"):
        a = ctx.log_term_coeffs[:, None] + np.where(k > 0, k * np.log(np.abs(z))[None, :], 0.0)
    peak = np.max(a, axis=0)
    s = np.sum(np.exp(a - peak) * np.exp(1j * k * np.angle(z)[None, :]), axis=0)
    return np.exp(log_pref + peak) * s


def kernel_matrix(ctx: KernelContext, points) -> np.ndarray:
    pts = [complex(p) for p in points]
    return np.array([[kernel(ctx, wj, wk.conjugate()) for wk in pts] for wj in pts])


def correlation_fn(ctx: KernelContext, points) -> float:
    """``p``-point correlation ``det[K(w_j, conj(w_k))]``; zero when ``p > n``."""
    pts = list(points)
    p = len(pts)
    if p == 0:
        return 1.0
    if p > ctx.n:
        return 0.0
    mat = kernel_matrix(ctx, pts)
    diag = mat.diagonal().real.copy()
    if np.any(diag <= 0):
        return 0.0
    scale = 1.0 / np.sqrt(diag)
    normed = mat * scale[:, None] * scale[None, :]
    det = np.linalg.det(normed).real * float(np.prod(diag))
    return max(det, 0.0)


def log_norm_constant_jpdf(n: int, nu: int) -> float:
    """``log c_{n,m}`` with ``c = 2^{nm} pi^n n! prod_{j<=n} Gamma(j) prod_{j<=m} Gamma(j) / prod_{j<=nu} Gamma(j)``."""
    m = n + nu
    return (n * m * LOG2 + n * LOGPI + math.lgamma(n + 1.0)
            + sum(math.lgamma(j) for j in range(1, n + 1))
            + sum(math.lgamma(j) for j in range(nu + 1, m + 1)))


def jpdf_log(n: int, nu: int, ws) -> float:
    """Log joint density of all ``n`` eigenvalues; ``-inf`` when two coincide."""
    _check_n_nu(n, nu)
    pts = np.asarray(ws, dtype=complex).ravel()
    if pts.size != n:
        raise ValueError(f"expected {n} eigenvalues, got {pts.size}")
    diffs = np.abs(pts[:, None] - pts[None, :])[np.triu_indices(n, 1)]
    if np.any(diffs == 0):
        return -math.inf
    r = np.abs(pts)
    if nu == 0 and np.any(r == 0):
        return math.inf
    return (-log_norm_constant_jpdf(n, nu) + 2.0 * float(np.sum(np.log(diffs)))
            + float(np.sum(log_weight(nu, r))))


def log_norm_constant(j: int, nu: int) -> float:
    """``log N_j`` with ``N_j = int |w|^{2j} |w|^nu K_nu(|w|) d^2w = 2^{2j+nu+1} pi j! (j+nu)!``."""
    _check_n_nu(1, nu)
    if int(j) != j or j < 0:
        raise ValueError(f"j must be a nonnegative integer, got {j}")
    return (2 * j + nu + 1) * LOG2 + LOGPI + math.lgamma(j + 1.0) + math.lgamma(j + nu + 1.0)


def norm_constant(j: int, nu: int) -> float:
    return math.exp(log_norm_constant(j, nu))
