"""Hot numeric kernels.

Scalar kernels are written against ``math`` so the same source runs compiled
(numba) or interpreted.  Array kernels come in two flavours: an explicit loop
compiled by numba (``*_loop``) and a vectorised numpy version (``*_np``); the
public dispatchers pick one according to :mod:`ellcover._accel`.

Model parameters travel as plain floats ``(a, b, x0, H, kind)`` where ``kind``
is one of :data:`VERTICAL`, :data:`TILTED_INSIDE`, :data:`TILTED_OUTSIDE`.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import NUMBA_OK, njit

VERTICAL = 0
TILTED_INSIDE = 1
TILTED_OUTSIDE = 2

TWO_PI = 2.0 * math.pi
_EPS = 2.220446049250313e-16
_TINY = 1e-300
_MAXIT = 2000
# radii within this relative distance of a branch edge belong to the inner branch
_EDGE = 1e-12


# ---------------------------------------------------------------- geometry --

@njit(cache=True)
def boundary_cos(r, a, b, x0):
    """Cosine of the polar angle at which the circle of radius ``r`` about O meets the rim.

    Rationalised form of ``(k1 + Lambda1) / (ecc^2 a^2 r)``; it has no
    ``ecc^2`` in the denominator and so survives the near-circular limit.
    """
    e2 = 1.0 - (b / a) ** 2
    if e2 < 0.0:
        e2 = 0.0
    if x0 == 0.0:
        # centred ellipse: the ratio above is 0/0 at r = b, this form is not
        if e2 == 0.0 or r <= 0.0:
            return 1.0
        return math.sqrt(max(r * r - b * b, 0.0)) / (math.sqrt(e2) * r)
    rad = e2 * a * a * r * r - b * b * (e2 * a * a - x0 * x0)
    if rad < 0.0:
        rad = 0.0
    lam1 = a * math.sqrt(rad)
    den = r * (lam1 + b * b * x0)
    if den <= 0.0:
        return -1.0
    return (a * a * (r * r - b * b) + b * b * x0 * x0) / den


@njit(cache=True)
def angle_measure(r, a, b, x0, kind):
    """Total polar angle of the circle of radius ``r`` (about O) lying inside the ellipse."""
    if r < 0.0:
        return 0.0
    if kind == VERTICAL:
        if r <= b * (1.0 + _EDGE):
            return TWO_PI
        if r > a * (1.0 + _EDGE):
            return 0.0
        u = boundary_cos(r, a, b, 0.0)
        return 4.0 * math.acos(min(1.0, max(-1.0, u)))
    if kind == TILTED_INSIDE:
        if r <= (a - x0) + a * _EDGE:
            return TWO_PI
    elif r < (x0 - a) * (1.0 - _EDGE):
        return 0.0
    if r > (a + x0) * (1.0 + _EDGE):
        return 0.0
    u = boundary_cos(r, a, b, x0)
    return 2.0 * math.acos(min(1.0, max(-1.0, u)))


@njit(cache=True)
def radial_pdf_k(r, a, b, x0, kind):
    return r * angle_measure(r, a, b, x0, kind) / (math.pi * a * b)


@njit(cache=True)
def euclid_pdf_k(d, a, b, x0, H, kind):
    if d < H:
        return 0.0
    r = math.sqrt((d - H) * (d + H))
    return d * angle_measure(r, a, b, x0, kind) / (math.pi * a * b)


# ------------------------------------------------------- incomplete gamma --

@njit(cache=True)
def _gamma_series_sum(s, x):
    # sum_{n>=0} x^n / (s (s+1) ... (s+n)); lower gamma = x^s e^-x * sum
    ap = s
    term = 1.0 / s
    total = term
    for _ in range(_MAXIT):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            break
    return total


@njit(cache=True)
def _gamma_cf(s, x):
    # modified Lentz for the continued fraction of e^x x^-s Gamma(s, x)
    bb = x + 1.0 - s
    c = 1.0 / _TINY
    dd = 1.0 / bb if bb != 0.0 else 1.0 / _TINY
    h = dd
    for i in range(1, _MAXIT):
        an = -i * (i - s)
        bb += 2.0
        dd = an * dd + bb
        if abs(dd) < _TINY:
            dd = _TINY
        c = bb + an / c
        if abs(c) < _TINY:
            c = _TINY
        dd = 1.0 / dd
        delta = dd * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            break
    return h


@njit(cache=True)
def upper_gamma_k(s, x):
    """Non-regularised upper incomplete gamma ``Gamma(s, x)`` for ``s > 0, x >= 0``."""
    if x == 0.0:
        return math.gamma(s)
    if x < s + 1.0:
        return math.gamma(s) - math.exp(s * math.log(x) - x) * _gamma_series_sum(s, x)
    return math.exp(s * math.log(x) - x) * _gamma_cf(s, x)


@njit(cache=True)
def lower_reg_gamma_k(s, x):
    """Regularised lower incomplete gamma ``P(s, x)``."""
    if x <= 0.0:
        return 0.0
    if x < s + 1.0:
        v = math.exp(s * math.log(x) - x - math.lgamma(s)) * _gamma_series_sum(s, x)
        return min(v, 1.0)
    return 1.0 - math.exp(s * math.log(x) - x - math.lgamma(s)) * _gamma_cf(s, x)


@njit(cache=True)
def upper_reg_gamma_k(s, x):
    """Regularised upper incomplete gamma ``Q(s, x)``."""
    if x <= 0.0:
        return 1.0
    if x < s + 1.0:
        return 1.0 - lower_reg_gamma_k(s, x)
    return math.exp(s * math.log(x) - x - math.lgamma(s)) * _gamma_cf(s, x)


# -------------------------------------------------------- SNR integrands --

@njit(cache=True)
def snr_cdf_integrand_k(d, a, b, x0, H, kind, m, nu, gbar, g):
    """P(gamma_snr <= g | d) * f_d(d)."""
    f = euclid_pdf_k(d, a, b, x0, H, kind)
    if f == 0.0:
        return 0.0
    return lower_reg_gamma_k(m, m * g * d**nu / gbar) * f


@njit(cache=True)
def snr_pdf_integrand_k(d, a, b, x0, H, kind, m, nu, gbar, g):
    """Conditional Nakagami SNR density at ``g`` given ``d``, times f_d(d)."""
    f = euclid_pdf_k(d, a, b, x0, H, kind)
    if f == 0.0 or g <= 0.0:
        return 0.0
    rate = m * d**nu / gbar
    logc = m * math.log(rate) + (m - 1.0) * math.log(g) - g * rate - math.lgamma(m)
    return math.exp(logc) * f


# ------------------------------------------------------------ array kernels --

@njit(cache=True)
def _euclid_pdf_loop(d, a, b, x0, H, kind):
    out = np.empty(d.shape[0])
    for i in range(d.shape[0]):
        out[i] = euclid_pdf_k(d[i], a, b, x0, H, kind)
    return out


@njit(cache=True)
def _radial_pdf_loop(r, a, b, x0, kind):
    out = np.empty(r.shape[0])
    for i in range(r.shape[0]):
        out[i] = radial_pdf_k(r[i], a, b, x0, kind)
    return out


def _boundary_cos_np(r, a, b, x0):
    e2 = max(0.0, 1.0 - (b / a) ** 2)
    if x0 == 0.0:
        if e2 == 0.0:
            return np.ones_like(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            u = np.sqrt(np.maximum(r * r - b * b, 0.0)) / (math.sqrt(e2) * r)
        return np.where(r > 0.0, u, 1.0)
    rad = np.maximum(e2 * a * a * r * r - b * b * (e2 * a * a - x0 * x0), 0.0)
    den = r * (a * np.sqrt(rad) + b * b * x0)
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (a * a * (r * r - b * b) + b * b * x0 * x0) / den
    return np.where(den > 0.0, u, -1.0)


def _angle_measure_np(r, a, b, x0, kind):
    r = np.asarray(r, dtype=float)
    u = np.clip(_boundary_cos_np(r, a, b, x0), -1.0, 1.0)
    if kind == VERTICAL:
        full = r <= b * (1.0 + _EDGE)
        arc = 4.0 * np.arccos(u)
        inside = (r >= 0.0) & (r <= a * (1.0 + _EDGE))
    elif kind == TILTED_INSIDE:
        full = r <= (a - x0) + a * _EDGE
        arc = 2.0 * np.arccos(u)
        inside = (r >= 0.0) & (r <= (a + x0) * (1.0 + _EDGE))
    else:
        full = np.zeros(r.shape, dtype=bool)
        arc = 2.0 * np.arccos(u)
        inside = (r >= (x0 - a) * (1.0 - _EDGE)) & (r <= (a + x0) * (1.0 + _EDGE))
    return np.where(inside, np.where(full, TWO_PI, arc), 0.0)


def _radial_pdf_np(r, a, b, x0, kind):
    r = np.asarray(r, dtype=float)
    return r * _angle_measure_np(r, a, b, x0, kind) / (math.pi * a * b)


def _euclid_pdf_np(d, a, b, x0, H, kind):
    d = np.asarray(d, dtype=float)
    ok = d >= H
    r = np.sqrt(np.where(ok, (d - H) * (d + H), 0.0))
    return np.where(ok, d * _angle_measure_np(r, a, b, x0, kind) / (math.pi * a * b), 0.0)


@njit(cache=True)
def _cdf_table_loop(x, nodes, cum, gx, gw, a, b, x0, H, kind):
    n = x.shape[0]
    out = np.empty(n)
    m = nodes.shape[0]
    for i in range(n):
        xi = x[i]
        if xi <= nodes[0]:
            out[i] = 0.0
            continue
        if xi >= nodes[m - 1]:
            out[i] = 1.0
            continue
        j = np.searchsorted(nodes, xi, side="right") - 1
        lo = nodes[j]
        half = 0.5 * (xi - lo)
        mid = lo + half
        acc = 0.0
        for k in range(gx.shape[0]):
            acc += gw[k] * euclid_pdf_k(mid + half * gx[k], a, b, x0, H, kind)
        v = cum[j] + half * acc
        out[i] = min(1.0, max(0.0, v))
    return out


def _cdf_table_np(x, nodes, cum, gx, gw, a, b, x0, H, kind, chunk=1 << 18):
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape)
    for s in range(0, x.size, chunk):
        xi = x[s:s + chunk]
        j = np.clip(np.searchsorted(nodes, xi, side="right") - 1, 0, nodes.size - 1)
        lo = nodes[j]
        half = 0.5 * (np.clip(xi, nodes[0], nodes[-1]) - lo)
        pts = (lo + half)[:, None] + half[:, None] * gx[None, :]
        vals = _euclid_pdf_np(pts, a, b, x0, H, kind)
        v = cum[j] + half * (vals @ gw)
        v = np.where(xi <= nodes[0], 0.0, np.where(xi >= nodes[-1], 1.0, v))
        out[s:s + chunk] = np.clip(v, 0.0, 1.0)
    return out


@njit(cache=True, nogil=True)
def _disc_to_distance_loop(u1, u2, a, b, x0, H):
    n = u1.shape[0]
    x = np.empty(n)
    y = np.empty(n)
    d = np.empty(n)
    for i in range(n):
        rho = math.sqrt(u1[i])
        ang = TWO_PI * u2[i]
        x[i] = x0 + a * rho * math.cos(ang)
        y[i] = b * rho * math.sin(ang)
        d[i] = math.sqrt(x[i] * x[i] + y[i] * y[i] + H * H)
    return x, y, d


def _disc_to_distance_np(u1, u2, a, b, x0, H):
    rho = np.sqrt(u1)
    ang = TWO_PI * u2
    x = x0 + a * rho * np.cos(ang)
    y = b * rho * np.sin(ang)
    return x, y, np.sqrt(x * x + y * y + H * H)


@njit(cache=True)
def _ks_loop(cdf_sorted):
    n = cdf_sorted.shape[0]
    best = 0.0
    for i in range(n):
        f = cdf_sorted[i]
        hi = (i + 1) / n - f
        lo = f - i / n
        if hi > best:
            best = hi
        if lo > best:
            best = lo
    return best


def _ks_np(cdf_sorted):
    n = cdf_sorted.size
    i = np.arange(n)
    return float(max(np.max((i + 1) / n - cdf_sorted), np.max(cdf_sorted - i / n), 0.0))


# ------------------------------------------------------------- dispatchers --

def euclid_pdf_array(d, a, b, x0, H, kind):
    d = np.ascontiguousarray(d, dtype=float)
    if NUMBA_OK:
        return _euclid_pdf_loop(d.ravel(), a, b, x0, H, kind).reshape(d.shape)
    return _euclid_pdf_np(d, a, b, x0, H, kind)


def radial_pdf_array(r, a, b, x0, kind):
    r = np.ascontiguousarray(r, dtype=float)
    if NUMBA_OK:
        return _radial_pdf_loop(r.ravel(), a, b, x0, kind).reshape(r.shape)
    return _radial_pdf_np(r, a, b, x0, kind)


def cdf_table_eval(x, nodes, cum, gx, gw, a, b, x0, H, kind):
    x = np.ascontiguousarray(x, dtype=float)
    if NUMBA_OK:
        return _cdf_table_loop(x.ravel(), nodes, cum, gx, gw, a, b, x0, H, kind).reshape(x.shape)
    return _cdf_table_np(x, nodes, cum, gx, gw, a, b, x0, H, kind)


def disc_to_distance(u1, u2, a, b, x0, H):
    if NUMBA_OK:
        return _disc_to_distance_loop(u1, u2, a, b, x0, H)
    return _disc_to_distance_np(u1, u2, a, b, x0, H)


def ks_statistic(cdf_sorted):
    cdf_sorted = np.ascontiguousarray(cdf_sorted, dtype=float)
    if cdf_sorted.size == 0:
        raise ValueError("empty sample")
    if NUMBA_OK:
        return float(_ks_loop(cdf_sorted))
    return _ks_np(cdf_sorted)


# ---------------------------------------------------- quadrature callables --

_LLC_CACHE: dict = {}


def _make_llc(kernel, nparams):
    from numba import cfunc, types
    from scipy import LowLevelCallable

    if nparams == 5:
        def body(n, xx):
            return kernel(xx[0], xx[1], xx[2], xx[3], xx[4], int(xx[5]))
    elif nparams == 4:
        def body(n, xx):
            return kernel(xx[0], xx[1], xx[2], xx[3], int(xx[4]))
    else:
        def body(n, xx):
            return kernel(xx[0], xx[1], xx[2], xx[3], xx[4], int(xx[5]), xx[6], xx[7], xx[8], xx[9])
    sig = types.double(types.intc, types.CPointer(types.double))
    return LowLevelCallable(cfunc(sig, cache=True)(body).ctypes)


def integrand(name):
    """Callable ``f(x, *params)`` usable by ``scipy.integrate.quad``.

    With numba enabled this is a compiled C callback, otherwise the
    interpreted scalar kernel.
    """
    kernel, nparams = {
        "euclid_pdf": (euclid_pdf_k, 5),
        "radial_pdf": (radial_pdf_k, 4),
        "snr_cdf": (snr_cdf_integrand_k, 9),
        "snr_pdf": (snr_pdf_integrand_k, 9),
    }[name]
    if not NUMBA_OK:
        return kernel
    if name not in _LLC_CACHE:
        _LLC_CACHE[name] = _make_llc(kernel, nparams)
    return _LLC_CACHE[name]
