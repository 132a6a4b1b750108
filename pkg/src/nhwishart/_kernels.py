"""Hot loops: matrix products and the complex Hessenberg-QR eigenvalue solver.

These functions are compiled by numba unless the JIT is disabled, in which case
the same bodies run as row/column-vectorised numpy. Summation orders are fixed
by explicit loops so a given backend is bitwise reproducible.
"""

import cmath
import math

import numpy as np

from ._accel import njit

EPS = 2.220446049250313e-16

STATUS_OK = 0
STATUS_NO_CONVERGENCE = 1


@njit
def cross_product(x, y):
    """``x @ y^H`` accumulated one column (time index) at a time."""
    n = x.shape[0]
    out = np.zeros((n, y.shape[0]), dtype=np.complex128)
    for j in range(x.shape[1]):
        yc = np.conj(y[:, j])
        for a in range(n):
            out[a, :] += x[a, j] * yc
    return out


@njit
def hessenberg_inplace(h):
    n = h.shape[0]
    for k in range(n - 2):
        v = h[k + 1:, k].copy()
        alpha = math.sqrt(np.sum(v.real ** 2 + v.imag ** 2))
        if alpha == 0.0:
            continue
        x0 = v[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0 + 0.0j
        v[0] += phase * alpha
        vn2 = np.sum(v.real ** 2 + v.imag ** 2)
        beta = 2.0 / vn2
        # left: rows k+1.., columns k..
        s = np.zeros(n - k, dtype=np.complex128)
        for i in range(v.shape[0]):
            s += np.conj(v[i]) * h[k + 1 + i, k:]
        s *= beta
        for i in range(v.shape[0]):
            h[k + 1 + i, k:] -= v[i] * s
        # right: all rows, columns k+1..
        t = np.zeros(n, dtype=np.complex128)
        for i in range(v.shape[0]):
            t += h[:, k + 1 + i] * v[i]
        t *= beta
        for i in range(v.shape[0]):
            h[:, k + 1 + i] -= t * np.conj(v[i])
        h[k + 2:, k] = 0.0
    return h


@njit
def _givens(f, g):
    af = abs(f)
    ag = abs(g)
    if ag == 0.0:
        return 1.0, 0.0j
    if af == 0.0:
        return 0.0, 1.0 + 0.0j
    r = math.hypot(af, ag)
    return af / r, (f / af) * np.conj(g) / r


@njit
def _eig2(a, b, c, d):
    half_tr = 0.5 * (a + d)
    disc = cmath.sqrt(0.25 * (a - d) * (a - d) + b * c)
    l1 = half_tr + disc
    l2 = half_tr - disc
    if abs(l2) > abs(l1):
        l1, l2 = l2, l1
    if l1 != 0:
        l2 = (a * d - b * c) / l1
    return l1, l2


@njit
def _qr_step(h, lo, hi, mu):
    m = hi - lo
    cs = np.empty(m)
    sn = np.empty(m, dtype=np.complex128)
    for k in range(lo, hi + 1):
        h[k, k] -= mu
    for k in range(lo, hi):
        c, s = _givens(h[k, k], h[k + 1, k])
        cs[k - lo] = c
        sn[k - lo] = s
        rk = h[k, k:hi + 1].copy()
        rk1 = h[k + 1, k:hi + 1].copy()
        h[k, k:hi + 1] = c * rk + s * rk1
        h[k + 1, k:hi + 1] = -np.conj(s) * rk + c * rk1
    for k in range(lo, hi):
        c = cs[k - lo]
        s = sn[k - lo]
        top = min(k + 2, hi) + 1
        ck = h[lo:top, k].copy()
        ck1 = h[lo:top, k + 1].copy()
        h[lo:top, k] = c * ck + np.conj(s) * ck1
        h[lo:top, k + 1] = -s * ck + c * ck1
    for k in range(lo, hi + 1):
        h[k, k] += mu


@njit
def hessenberg_qr_eigvals(h, max_sweeps):
    """Eigenvalues of an upper Hessenberg matrix, overwriting it.

    Returns ``(eigenvalues, status)``; ``status`` is ``STATUS_NO_CONVERGENCE``
    when some eigenvalue needed more than ``max_sweeps`` shifted QR sweeps.
    """
    n = h.shape[0]
    eig = np.zeros(n, dtype=np.complex128)
    fro = math.sqrt(np.sum(h.real ** 2 + h.imag ** 2))
    floor = EPS * fro if fro > 0 else 1e-300
    hi = n - 1
    its = 0
    while hi >= 0:
        if hi == 0:
            eig[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            sub = abs(h[lo, lo - 1])
            scale = abs(h[lo, lo]) + abs(h[lo - 1, lo - 1])
            if sub <= EPS * scale or sub <= floor:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eig[hi] = h[hi, hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            l1, l2 = _eig2(h[lo, lo], h[lo, hi], h[hi, lo], h[hi, hi])
            eig[lo] = l1
            eig[hi] = l2
            hi -= 2
            its = 0
            continue
        its += 1
        if its > max_sweeps:
            return eig, STATUS_NO_CONVERGENCE
        if its % 10 == 0:
            # exceptional shift breaks rare cycles
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            l1, l2 = _eig2(h[hi - 1, hi - 1], h[hi - 1, hi], h[hi, hi - 1], h[hi, hi])
            mu = l1 if abs(l1 - h[hi, hi]) < abs(l2 - h[hi, hi]) else l2
        _qr_step(h, lo, hi, mu)
    return eig, STATUS_OK


@njit
def eigvals_kernel(m, max_sweeps):
    h = m.copy()
    hessenberg_inplace(h)
    return hessenberg_qr_eigvals(h, max_sweeps)


@njit
def wishart_trial(x, y, max_sweeps):
    """Eigenvalues of ``x y^H`` plus the trace-identity residual."""
    w = cross_product(x, y)
    eig, status = eigvals_kernel(w, max_sweeps)
    fro = math.sqrt(np.sum(w.real ** 2 + w.imag ** 2))
    tr1 = 0.0j
    tr2 = 0.0j
    for i in range(w.shape[0]):
        tr1 += w[i, i]
        tr2 += np.sum(w[i, :] * w[:, i])
    res = 0.0
    if fro > 0:
        res = max(abs(np.sum(eig) - tr1) / fro, abs(np.sum(eig * eig) - tr2) / (fro * fro))
    return eig, status, res
