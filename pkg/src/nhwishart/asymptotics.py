r"""Large-``n`` / large-``nu`` limit laws for the mean eigenvalue density.

Standardized units (``a2 a2' = 1/4``) throughout. Each law is a total
function of ``w`` so it can be tabulated anywhere, but it is only meant to be
accurate in its own window:

* Regime I (``n`` fixed, ``nu >> 1``, ``|w| ~ sqrt(nu)``):
  :math:`\Gamma(n, |w|^2/4\nu) / (4\pi\nu\Gamma(n))`.
* Regime II (``n >> 1``, ``nu = O(1)``):
  :math:`\frac{1}{4\pi} I_\nu K_\nu \,\mathrm{erfc}((|w|-2n)/2\sqrt n)`.
* Regime III (``nu = q n``, both large):
  :math:`\frac{1}{8\pi\sqrt{|w|^2+n^2q^2}}\,
  \mathrm{erfc}\big((|w|-2n\sqrt{q+1})/\sqrt{2n(q+2)}\big)`.

Also here: the Coulomb-fluid predictor (density from the Laplacian of a radial
confinement potential, support edge from the normalization condition) and the
Hermitian Marchenko-Pastur baseline.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import specfun
from .finite_n import ORIGIN_CUTOFF, OriginSingularityWarning


@dataclass(frozen=True)
class RegimeParams:
    regime: str
    n: int
    nu: float = 0.0
    q: float = 0.0

    def __post_init__(self):
        if self.regime not in ("I", "II", "III"):
            raise ValueError(f"regime must be 'I', 'II' or 'III', got {self.regime!r}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.regime == "I" and self.nu < 1:
            raise ValueError("regime I needs nu >= 1")
        if self.regime == "III" and not self.q > 0:
            raise ValueError("regime III needs q > 0")
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")

    @classmethod
    def regime3(cls, n: int, q: float) -> "RegimeParams":
        return cls("III", n, nu=q * n, q=q)


def _radial(func):
    """Lift a scalar density of ``r = |w|`` to scalars or arrays of complex ``w``."""
    vec = np.vectorize(func, otypes=[float])

    def wrapper(*args):
        *params, w = args
        r = np.abs(np.asarray(w))
        if r.ndim == 0:
            return func(*params, float(r))
        return vec(*params, r)

    wrapper.__name__ = func.__name__
    wrapper.__doc__ = func.__doc__
    return wrapper


def _regime1(n, nu, r):
    return specfun.gamma_upper_regularized(n, r * r / (4.0 * nu)) / (4.0 * math.pi * nu)


def _ik_product(nu, r):
    if r == 0.0:
        return 1.0 / (2.0 * nu)
    return math.exp(specfun.log_bessel_i(nu, r) + specfun.log_bessel_k(nu, r))


def _regime2(n, nu, r):
    if nu == 0 and r < ORIGIN_CUTOFF:
        warnings.warn("nu = 0 density is log-singular at the origin; returning inf",
                      OriginSingularityWarning, stacklevel=4)
        return math.inf
    edge = math.erfc((r - 2.0 * n) / (2.0 * math.sqrt(n)))
    return _ik_product(nu, r) * edge / (4.0 * math.pi)


def _regime3(n, q, r):
    nu = n * q
    edge = math.erfc((r - 2.0 * n * math.sqrt(q + 1.0)) / math.sqrt(2.0 * n * (q + 2.0)))
    return edge / (8.0 * math.pi * math.sqrt(r * r + nu * nu))


def _bulk2(nu, r):
    if nu == 0 and r < ORIGIN_CUTOFF:
        return math.inf
    return _ik_product(nu, r) / (2.0 * math.pi)


density_regime1 = _radial(_regime1)
density_regime1.__doc__ = "Complementary-Gamma law, ``density_regime1(n, nu, w)``."
density_regime2 = _radial(_regime2)
density_regime2.__doc__ = ("Bessel-erfc law, ``density_regime2(n, nu, w)``; ``inf`` with an "
                           "OriginSingularityWarning at the origin when ``nu = 0``.")
density_regime3 = _radial(_regime3)
density_regime3.__doc__ = "Complex-plane Marchenko-Pastur analogue, ``density_regime3(n, q, w)``."
bulk_density_regime2 = _radial(_bulk2)
bulk_density_regime2.__doc__ = "``I_nu K_nu / 2 pi``: the ``n -> infinity`` limit at fixed ``|w|``."


def _edge2(n, r):
    return math.erfc((r - 2.0 * n) / (2.0 * math.sqrt(n))) / (8.0 * math.pi * r)


edge_law_regime2 = _radial(_edge2)
edge_law_regime2.__doc__ = ("``erfc((|w| - 2n) / 2 sqrt(n)) / (8 pi |w|)``, the Regime II law within "
                            "``O(sqrt(n))`` of ``2n``.")


def far_field_regime3(nu: float, w):
    """``1 / (4 pi sqrt(|w|^2 + nu^2))``, Regime III away from the edge."""
    r = np.abs(np.asarray(w, dtype=complex))
    out = 1.0 / (4.0 * math.pi * np.sqrt(r * r + nu * nu))
    return float(out) if out.ndim == 0 else out


def critical_radius(params: RegimeParams) -> float:
    """``2 sqrt(n nu)``, ``2n`` or ``2n sqrt(q+1)`` for regimes I, II, III."""
    if params.regime == "I":
        return 2.0 * math.sqrt(params.n * params.nu)
    if params.regime == "II":
        return 2.0 * params.n
    return 2.0 * params.n * math.sqrt(params.q + 1.0)


# ---------------------------------------------------------------------------
# Coulomb fluid
# ---------------------------------------------------------------------------

def default_step(r: float) -> float:
    """``max(1e-4, 1e-3 r)``: with ``h ~ 1e-6 r`` the second difference of a
    potential of size ``V`` loses ``eps V / h^2`` to roundoff, about 1e-4
    relative at ``r = 100``."""
    return max(1e-4, 1e-3 * r)


def _dv(potential, r, h):
    return (potential(r + h) - potential(r - h)) / (2.0 * h)


def coulomb_density(potential: Callable[[float], float], r: float, step: float | None = None) -> float:
    """``(V''(r) + V'(r)/r) / 4 pi`` by second-order central differences."""
    h = default_step(r) if step is None else step
    if r <= 2.0 * h:
        raise ValueError(f"r={r} too close to the origin for step {h}")
    v0 = potential(r)
    d2 = (potential(r + h) - 2.0 * v0 + potential(r - h)) / (h * h)
    return (d2 + _dv(potential, r, h) / r) / (4.0 * math.pi)


def coulomb_edge(potential: Callable[[float], float], n: float, origin_limit: float = 0.0,
                 bracket: tuple[float, float] | None = None, rtol: float = 1e-10) -> float:
    """Support radius ``R`` solving ``(R V'(R) - origin_limit) / 2 = n`` by bisection.

    ``origin_limit`` is ``lim_{r->0} r V'(r)``, supplied by the caller because
    it depends on the potential's logarithmic part.
    """
    def g(r):
        return 0.5 * (r * _dv(potential, r, default_step(r)) - origin_limit) - n

    if bracket is None:
        lo = 1e-3
        hi = 1.0
        while g(hi) < 0:
            hi *= 2.0
            if hi > 1e12:
                raise ValueError("could not bracket the Coulomb-fluid edge")
        lo = max(lo, 0.5 * hi) if g(0.5 * hi) < 0 else lo
    else:
        lo, hi = bracket
    glo, ghi = g(lo), g(hi)
    if glo > 0 or ghi < 0:
        raise ValueError(f"edge not bracketed by [{lo}, {hi}] (g = {glo:.3g}, {ghi:.3g})")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def ginibre_potential(r: float) -> float:
    return r * r


def regime2_potential(nu: float) -> Callable[[float], float]:
    """Large-``|w|`` effective potential ``r - (nu - 1/2) log r``; origin limit ``-(nu - 1/2)``."""
    return lambda r: r - (nu - 0.5) * math.log(r)


def regime3_potential(nu: float) -> Callable[[float], float]:
    """``sqrt(r^2+nu^2) - nu log(nu + sqrt(r^2+nu^2)) + log(r^2+nu^2)/4``; origin limit 0."""
    def v(r):
        s = math.sqrt(r * r + nu * nu)
        return s - nu * math.log(nu + s) + 0.25 * math.log(r * r + nu * nu)
    return v


# ---------------------------------------------------------------------------
# Hermitian baseline
# ---------------------------------------------------------------------------

def mp_endpoints(n: int, m: int, beta: int = 2, a: float = 1.0) -> tuple[float, float]:
    """``(n beta / 2a) (sqrt(m/n) -+ 1)^2``."""
    _check_mp(n, m, beta, a)
    q = m / n
    scale = n * beta / (2.0 * a)
    return scale * (math.sqrt(q) - 1.0) ** 2, scale * (math.sqrt(q) + 1.0) ** 2


def mp_density(lam, n: int, m: int, beta: int = 2, a: float = 1.0):
    """Marchenko-Pastur eigenvalue density of ``X X^H``, normalised to ``n``; zero off the support."""
    lo, hi = mp_endpoints(n, m, beta, a)
    lam_arr = np.asarray(lam, dtype=float)
    inside = (lam_arr > lo) & (lam_arr < hi)
    safe = np.where(inside, lam_arr, 0.5 * (lo + hi))
    val = a / (beta * math.pi) / safe * np.sqrt(np.clip((hi - safe) * (safe - lo), 0.0, None))
    out = np.where(inside, val, 0.0)
    return float(out) if out.ndim == 0 else out


def _check_mp(n, m, beta, a):
    if beta not in (1, 2, 4):
        raise ValueError(f"beta must be 1, 2 or 4, got {beta}")
    if m < n or n < 1:
        raise ValueError(f"need m >= n >= 1, got n={n}, m={m}")
    if not a > 0:
        raise ValueError("a must be positive")
