r"""Special functions: scaled modified Bessel functions, incomplete gamma, erfc.

Every Bessel routine works internally with :math:`\log K_\nu(x)` or
:math:`\log I_\nu(x)` so that arguments of order a few hundred (where
:math:`K_\nu` underflows double precision) stay representable. The public
``bessel_*_scaled`` functions return :math:`e^{x}K_\nu(x)` and
:math:`e^{-x}I_\nu(x)`; the ``log_bessel_*`` functions return the unscaled
logarithm.

Evaluation strategy for :math:`K_\nu(x)`, integer :math:`\nu`:

* :math:`\nu \ge 50`: Olver's uniform large-order expansion, 9 terms.
* :math:`x > \max(30, \nu^2/4)`: Hankel's large-argument series.
* otherwise :math:`K_0, K_1` from the ascending series (:math:`x \le 2`) or
  Steed's continued fraction (:math:`x > 2`), followed by the upward
  recurrence carried as a product of ratios.

:math:`I_\nu(x)` uses the Taylor series summed outward from its largest term,
Hankel's series once :math:`x > \max(40, \nu^2)`, and the uniform expansion for
:math:`\nu \ge 50`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from ._accel import njit

EULER_GAMMA = 0.57721566490153286061
LOG_2PI = math.log(2.0 * math.pi)

UNIFORM_ORDER_MIN = 50
UNIFORM_TERMS = 9
_MAX_K = 8


# ---------------------------------------------------------------------------
# Olver polynomials U_k, V_k
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OlverFrame:
    """Scaled argument ``z`` with its exponent function ``eta`` and ``p``."""

    z: float
    eta: float
    p: float


@dataclass(frozen=True)
class OlverPolySet:
    """Exact coefficients of ``U_0..U_order`` and ``V_0..V_order``.

    ``u_coeffs[k][j]`` is the coefficient of ``p**j`` in ``U_k``.
    """

    order: int
    u_coeffs: tuple
    v_coeffs: tuple

    def u(self, k: int, p: float) -> float:
        return _horner_fraction(self.u_coeffs[k], p)

    def v(self, k: int, p: float) -> float:
        return _horner_fraction(self.v_coeffs[k], p)


def _horner_fraction(coeffs, p):
    acc = 0.0
    for c in reversed(coeffs):
        acc = acc * p + float(c)
    return acc


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_add(*polys):
    out = [Fraction(0)] * max(len(p) for p in polys)
    for p in polys:
        for i, c in enumerate(p):
            out[i] += c
    return out


def _poly_deriv(a):
    return [i * c for i, c in enumerate(a)][1:] or [Fraction(0)]


def _poly_integrate(a):
    return [Fraction(0)] + [c / (i + 1) for i, c in enumerate(a)]


def _trim(a):
    a = list(a)
    while len(a) > 1 and a[-1] == 0:
        a.pop()
    return tuple(a)


@lru_cache(maxsize=None)
def olver_polys(k_max: int) -> OlverPolySet:
    """Exact rational coefficients of the Debye polynomials up to ``k_max``.

    Uses ``U_0 = V_0 = 1`` and

        U_{k+1} = p^2 (1 - p^2) U_k' / 2 + (1/8) int_0^p (1 - 5 t^2) U_k(t) dt
        V_{k+1} = U_{k+1} - p (1 - p^2) U_k / 2 - p^2 (1 - p^2) U_k'
    """
    if k_max < 0 or k_max > _MAX_K:
        raise ValueError(f"k_max must be in [0, {_MAX_K}], got {k_max}")
    half = Fraction(1, 2)
    p2_1mp2_half = [Fraction(0), Fraction(0), half, Fraction(0), -half]
    p_1mp2_mhalf = [Fraction(0), -half, Fraction(0), half]
    p2_1mp2_neg = [Fraction(0), Fraction(0), Fraction(-1), Fraction(0), Fraction(1)]
    integrand_w = [Fraction(1, 8), Fraction(0), Fraction(-5, 8)]

    us = [(Fraction(1),)]
    vs = [(Fraction(1),)]
    for _ in range(k_max):
        u = list(us[-1])
        du = _poly_deriv(u)
        u_next = _poly_add(_poly_mul(p2_1mp2_half, du), _poly_integrate(_poly_mul(integrand_w, u)))
        v_next = _poly_add(u_next, _poly_mul(p_1mp2_mhalf, u), _poly_mul(p2_1mp2_neg, du))
        us.append(_trim(u_next))
        vs.append(_trim(v_next))
    return OlverPolySet(order=k_max, u_coeffs=tuple(us), v_coeffs=tuple(vs))


def _float_table(polys):
    table = np.zeros((len(polys), 3 * _MAX_K + 1))
    for k, coeffs in enumerate(polys):
        for j, c in enumerate(coeffs):
            table[k, j] = float(c)
    return table


_POLYS = olver_polys(_MAX_K)
U_TABLE = _float_table(_POLYS.u_coeffs)
V_TABLE = _float_table(_POLYS.v_coeffs)


def olver_frame(z: float) -> OlverFrame:
    """``eta(z) = sqrt(1+z^2) + log(z / (1 + sqrt(1+z^2)))`` and ``p = 1/sqrt(1+z^2)``."""
    if not z > 0:
        raise ValueError(f"olver_frame requires z > 0, got {z}")
    return OlverFrame(z=float(z), eta=_eta(z), p=1.0 / math.sqrt(1.0 + z * z))


# ---------------------------------------------------------------------------
# Scalar kernels
# ---------------------------------------------------------------------------

@njit
def _eta(z):
    s = math.sqrt(1.0 + z * z)
    return s + math.log(z / (1.0 + s))


@njit
def _horner(row, nterms, p):
    acc = 0.0
    for j in range(nterms - 1, -1, -1):
        acc = acc * p + row[j]
    return acc


@njit
def _debye_sum(table, nu, p, terms, alternate):
    s = 0.0
    nupow = 1.0
    sign = 1.0
    for k in range(terms):
        s += sign * _horner(table[k], 3 * k + 1, p) / nupow
        nupow *= nu
        if alternate:
            sign = -sign
    return s


@njit
def _uniform_log_k(nu, x, terms, table):
    z = x / nu
    s = _debye_sum(table, nu, 1.0 / math.sqrt(1.0 + z * z), terms, True)
    logabs = (0.5 * math.log(math.pi / (2.0 * nu)) - nu * _eta(z)
              - 0.25 * math.log1p(z * z) + math.log(abs(s)))
    return logabs, (1.0 if s > 0 else -1.0)


@njit
def _uniform_log_i(nu, x, terms, table):
    z = x / nu
    s = _debye_sum(table, nu, 1.0 / math.sqrt(1.0 + z * z), terms, False)
    logabs = (-0.5 * math.log(2.0 * math.pi * nu) + nu * _eta(z)
              - 0.25 * math.log1p(z * z) + math.log(abs(s)))
    return logabs, (1.0 if s > 0 else -1.0)


@njit
def _k01_series(x):
    # ascending series, x <= 2
    y = 0.25 * x * x
    lx = math.log(0.5 * x)
    i0 = 0.0
    i1 = 0.0
    s0 = 0.0
    s1 = 0.0
    t0 = 1.0  # y^k / (k!)^2
    t1 = 1.0  # y^k / (k! (k+1)!)
    psi_k = -EULER_GAMMA  # psi(k+1)
    for k in range(60):
        psi_k1 = psi_k + 1.0 / (k + 1)  # psi(k+2)
        i0 += t0
        i1 += t1
        s0 += psi_k * t0
        s1 += (psi_k + psi_k1) * t1
        if t0 < 1e-18 * i0:
            break
        t0 *= y / ((k + 1) * (k + 1))
        t1 *= y / ((k + 1) * (k + 2))
        psi_k = psi_k1
    i1 *= 0.5 * x
    k0 = -lx * i0 + s0
    k1 = 1.0 / x + lx * i1 - 0.25 * x * s1
    return k0, k1


@njit
def _k01_scaled_cf2(x):
    # Steed's continued fraction (Temme's normalisation), x > 2; returns e^x K0, e^x K1
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(1, 10000):
        a -= 2 * i
        c = -a * c / (i + 1.0)
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < 1e-17:
            break
    h = a1 * h
    k0 = math.sqrt(math.pi / (2.0 * x)) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


@njit
def _hankel_scaled(nu, x, sign):
    # sum_k sign^k a_k(nu) / x^k with a_k = prod_{j<=k} (4nu^2 - (2j-1)^2) / (k! 8^k)
    mu = 4.0 * nu * nu
    term = 1.0
    total = 1.0
    prev = 1.0
    for k in range(1, 500):
        term *= sign * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
        if abs(term) > abs(prev) and k > 1:
            break
        total += term
        if abs(term) < 1e-17 * abs(total):
            break
        prev = term
    return total


@njit
def _log_k_int(nu, x, table):
    if nu >= UNIFORM_ORDER_MIN:
        return _uniform_log_k(float(nu), x, UNIFORM_TERMS, table)[0]
    if x > 30.0 and x > 0.25 * nu * nu:
        return 0.5 * math.log(math.pi / (2.0 * x)) - x + math.log(_hankel_scaled(float(nu), x, 1.0))
    if x <= 2.0:
        k0, k1 = _k01_series(x)
        logk0 = math.log(k0)
    else:
        k0, k1 = _k01_scaled_cf2(x)
        logk0 = math.log(k0) - x
    if nu == 0:
        return logk0
    r = k1 / k0
    out = logk0 + math.log(r)
    for j in range(1, nu):
        r = 1.0 / r + 2.0 * j / x
        out += math.log(r)
    return out


@njit
def _log_i_int(nu, x, table):
    if x == 0.0:
        return 0.0 if nu == 0 else -math.inf
    if nu >= UNIFORM_ORDER_MIN:
        return _uniform_log_i(float(nu), x, UNIFORM_TERMS, table)[0]
    if x > 40.0 and x > float(nu) * nu:
        return x - 0.5 * math.log(2.0 * math.pi * x) + math.log(_hankel_scaled(float(nu), x, -1.0))
    # Taylor series about its largest term
    y = 0.25 * x * x
    kstar = int(0.5 * (math.sqrt(float(nu) * nu + x * x) - nu))
    logy = math.log(y)
    log_peak = (nu * math.log(0.5 * x) + kstar * logy
                - math.lgamma(kstar + 1.0) - math.lgamma(kstar + nu + 1.0))
    total = 1.0
    t = 1.0
    k = kstar
    while True:
        k += 1
        t *= y / (k * (k + nu))
        total += t
        if t < 1e-17 * total:
            break
    t = 1.0
    k = kstar
    while k > 0:
        t *= k * (k + nu) / y
        k -= 1
        total += t
        if t < 1e-17 * total:
            break
    return log_peak + math.log(total)


@njit
def _log_k_vec(nu, xs, table):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = _log_k_int(nu, xs[i], table)
    return out


@njit
def _log_i_vec(nu, xs, table):
    out = np.empty(xs.shape[0])
    for i in range(xs.shape[0]):
        out[i] = _log_i_int(nu, xs[i], table)
    return out


# ---------------------------------------------------------------------------
# Public surface
# ---------------------------------------------------------------------------

def _check_order(nu):
    if int(nu) != nu or nu < 0:
        raise ValueError(f"order must be a nonnegative integer, got {nu}")
    return int(nu)


def log_bessel_k(nu: int, x: float) -> float:
    """``log K_nu(x)`` for integer ``nu >= 0`` and ``x > 0``."""
    nu = _check_order(nu)
    if not x > 0:
        raise ValueError(f"K_nu(x) requires x > 0, got {x}")
    return _log_k_int(nu, float(x), U_TABLE)


def bessel_k_scaled(nu: int, x: float) -> float:
    """``exp(x) * K_nu(x)``; overflows to ``inf`` only for huge ``nu`` at tiny ``x``."""
    lk = log_bessel_k(nu, x) + x
    return math.exp(lk) if lk < 709.0 else math.inf


def log_bessel_i(nu: int, x: float) -> float:
    """``log I_nu(x)`` for integer ``nu >= 0``, ``x >= 0`` (``-inf`` at the origin for ``nu > 0``)."""
    nu = _check_order(nu)
    if x < 0:
        raise ValueError(f"I_nu(x) is evaluated for x >= 0 only, got {x}")
    return _log_i_int(nu, float(x), U_TABLE)


def bessel_i_scaled(nu: int, x: float) -> float:
    """``exp(-x) * I_nu(x)``."""
    return math.exp(log_bessel_i(nu, x) - x)


def log_bessel_k_array(nu: int, xs) -> np.ndarray:
    nu = _check_order(nu)
    xs = np.ascontiguousarray(xs, dtype=float)
    if np.any(xs <= 0):
        raise ValueError("K_nu(x) requires x > 0")
    return _log_k_vec(nu, xs.ravel(), U_TABLE).reshape(xs.shape)


def log_bessel_i_array(nu: int, xs) -> np.ndarray:
    nu = _check_order(nu)
    xs = np.ascontiguousarray(xs, dtype=float)
    if np.any(xs < 0):
        raise ValueError("I_nu(x) is evaluated for x >= 0 only")
    return _log_i_vec(nu, xs.ravel(), U_TABLE).reshape(xs.shape)


def _check_uniform(nu, z, terms):
    if not nu >= 10:
        raise ValueError(f"uniform expansion is used for nu >= 10, got {nu}")
    if not z > 0:
        raise ValueError(f"z must be positive, got {z}")
    if not 1 <= terms <= _MAX_K + 1:
        raise ValueError(f"terms must be in [1, {_MAX_K + 1}], got {terms}")


def bessel_k_uniform(nu: float, z: float, terms: int = UNIFORM_TERMS) -> tuple[float, float]:
    r"""Olver's expansion of :math:`K_\nu(\nu z)`.

    .. math::
        K_\nu(\nu z) \simeq \sqrt{\frac{\pi}{2\nu}}
        \frac{e^{-\nu\eta(z)}}{(1+z^2)^{1/4}}
        \sum_{k=0}^{\mathrm{terms}-1} (-1)^k \frac{U_k(p)}{\nu^k}

    Returns
    -------
    logabs, sign : float
        ``K ~ sign * exp(logabs)``. Accuracy degrades gracefully as ``nu``
        decreases; nothing is trapped.
    """
    _check_uniform(nu, z, terms)
    return _uniform_log_k(float(nu), float(nu) * z, terms, U_TABLE)


def bessel_i_uniform(nu: float, z: float, terms: int = UNIFORM_TERMS) -> tuple[float, float]:
    """Olver's expansion of ``I_nu(nu z)``, returned as ``(logabs, sign)``."""
    _check_uniform(nu, z, terms)
    return _uniform_log_i(float(nu), float(nu) * z, terms, U_TABLE)


def bessel_ip_uniform(nu: float, z: float, terms: int = UNIFORM_TERMS) -> tuple[float, float]:
    """Olver's expansion of the derivative ``I_nu'(nu z)``, as ``(logabs, sign)``."""
    _check_uniform(nu, z, terms)
    nu = float(nu)
    s = _debye_sum(V_TABLE, nu, 1.0 / math.sqrt(1.0 + z * z), terms, False)
    logabs = (-0.5 * math.log(2.0 * math.pi * nu) + nu * _eta(z)
              + 0.25 * math.log1p(z * z) - math.log(z) + math.log(abs(s)))
    return logabs, math.copysign(1.0, s)


def bessel_kp_uniform(nu: float, z: float, terms: int = UNIFORM_TERMS) -> tuple[float, float]:
    """Olver's expansion of the derivative ``K_nu'(nu z)``, as ``(logabs, sign)``."""
    _check_uniform(nu, z, terms)
    nu = float(nu)
    s = _debye_sum(V_TABLE, nu, 1.0 / math.sqrt(1.0 + z * z), terms, True)
    logabs = (0.5 * math.log(math.pi / (2.0 * nu)) - nu * _eta(z)
              + 0.25 * math.log1p(z * z) - math.log(z) + math.log(abs(s)))
    return logabs, -math.copysign(1.0, s)


def log_bessel_k_basset_asymptotic(nu: float, x: float) -> float:
    """Log of the large-``nu`` main term of ``K_nu(x sqrt(nu))``."""
    if not (nu > 0 and x > 0):
        raise ValueError(f"need nu > 0 and x > 0, got nu={nu}, x={x}")
    return (0.5 * nu * math.log(4.0 * nu / (x * x)) + 0.5 * math.log(math.pi / (2.0 * nu))
            - nu - 0.25 * x * x)


def bessel_k_basset_asymptotic(nu: float, x: float) -> float:
    r""":math:`(4\nu/x^2)^{\nu/2}\sqrt{\pi/2\nu}\,e^{-\nu}e^{-x^2/4}`, the main term
    of :math:`K_\nu(x\sqrt\nu)` as :math:`\nu\to\infty`."""
    return math.exp(log_bessel_k_basset_asymptotic(nu, x))


# ---------------------------------------------------------------------------
# Gamma family and erfc
# ---------------------------------------------------------------------------

def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_gamma requires x > 0, got {x}")
    return math.lgamma(x)


@njit
def _log_gamma_upper_reg(n, x):
    # log of exp(-x) * sum_{k<n} x^k / k!
    if x == 0.0:
        return 0.0
    lx = math.log(x)
    kmax = min(n - 1, int(x))
    peak = kmax * lx - math.lgamma(kmax + 1.0)
    total = 0.0
    for k in range(n):
        total += math.exp(k * lx - math.lgamma(k + 1.0) - peak)
    return peak + math.log(total) - x


def _check_gamma_args(n, x):
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    if x < 0:
        raise ValueError(f"x must be nonnegative, got {x}")
    return int(n), float(x)


def log_gamma_upper_regularized(n: int, x: float) -> float:
    n, x = _check_gamma_args(n, x)
    return _log_gamma_upper_reg(n, x)


def gamma_upper_regularized(n: int, x: float) -> float:
    """``Gamma(n, x) / Gamma(n)``, in ``[0, 1]``."""
    return math.exp(log_gamma_upper_regularized(n, x))


def gamma_upper(n: int, x: float) -> float:
    """Upper incomplete gamma ``Gamma(n, x)`` for integer ``n >= 1``."""
    n, x = _check_gamma_args(n, x)
    return math.exp(math.lgamma(n) + _log_gamma_upper_reg(n, x))


def erfc(t: float) -> float:
    return math.erfc(t)
