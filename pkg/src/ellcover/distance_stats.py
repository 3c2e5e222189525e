"""Radial and slant-distance statistics of a user dropped uniformly in the footprint."""
from __future__ import annotations

import enum
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .geometry import (
    EllipseFootprint,
    GeometryError,
    TiltedScenario,
    VerticalScenario,
    footprint_from_tilt,
    footprint_vertical,
    support_bounds,
)
from .quadrature import integrate_split

log = logging.getLogger(__name__)

CLAMP_WINDOW = 1e-9


class Scenario(enum.IntEnum):
    VERTICAL = kernels.VERTICAL
    TILTED_INSIDE = kernels.TILTED_INSIDE
    TILTED_OUTSIDE = kernels.TILTED_OUTSIDE


class ModelValidityWarning(UserWarning):
    """The full-circle branch of the tilted model does not fit inside the ellipse."""


@dataclass(frozen=True)
class DistanceModel:
    fp: EllipseFootprint
    H: float
    source: object = field(default=None, compare=False, repr=False)
    scenario: Scenario = field(init=False)
    bounds: tuple = field(init=False)

    def __post_init__(self):
        if not self.H > 0:
            raise GeometryError(f"altitude must be positive, got H={self.H}")
        fp = self.fp
        if fp.x0 == 0.0:
            tag = Scenario.VERTICAL
        elif fp.x0 <= fp.a:
            tag = Scenario.TILTED_INSIDE
            # disc of radius a - x0 about O lies in the ellipse iff x0 >= ecc^2 a
            if fp.x0 < fp.e2 * fp.a * (1 - 1e-12):
                warnings.warn(
                    f"x0={fp.x0:.6g} < ecc^2 a={fp.e2 * fp.a:.6g}: the circle of radius a-x0 "
                    "about O leaves the ellipse; analytic distance laws are inexact",
                    ModelValidityWarning,
                    stacklevel=3,
                )
        else:
            tag = Scenario.TILTED_OUTSIDE
        object.__setattr__(self, "scenario", tag)
        object.__setattr__(self, "bounds", support_bounds(fp, self.H))

    @classmethod
    def tilted(cls, H: float, theta: float, psi: float) -> "DistanceModel":
        s = TiltedScenario(H, theta, psi)
        return cls(footprint_from_tilt(s), H, source=s)

    @classmethod
    def tilted_deg(cls, H: float, theta_deg: float, psi_deg: float) -> "DistanceModel":
        return cls.tilted(H, math.radians(theta_deg), math.radians(psi_deg))

    @classmethod
    def vertical(cls, a: float, b: float, H: float) -> "DistanceModel":
        s = VerticalScenario(a, b, H)
        return cls(footprint_vertical(s), H, source=s)

    @property
    def params(self) -> tuple:
        """Flat ``(a, b, x0, H, kind)`` tuple handed to the kernels."""
        return (self.fp.a, self.fp.b, self.fp.x0, self.H, int(self.scenario))

    @property
    def radial_support(self) -> tuple[float, float, float]:
        """``(r_low, r_break, r_high)``; ``r_break`` closes the full-circle branch."""
        a, b, x0 = self.fp.a, self.fp.b, self.fp.x0
        if self.scenario is Scenario.VERTICAL:
            return 0.0, b, a
        if self.scenario is Scenario.TILTED_INSIDE:
            return 0.0, a - x0, a + x0
        return x0 - a, x0 - a, a + x0

    @cached_property
    def _cdf_table(self):
        d_min, d_br, d_max = self.bounds
        lin = np.linspace(d_min, d_br, 65) if d_br > d_min else np.array([d_min])
        t = np.linspace(0.0, math.pi, 513)
        cheb = d_br + (d_max - d_br) * 0.5 * (1.0 - np.cos(t))
        nodes = np.concatenate([lin, cheb[1:]])
        f = kernels.integrand("euclid_pdf")
        pieces = [integrate_split(f, (lo, hi), self.params)[0] for lo, hi in zip(nodes[:-1], nodes[1:])]
        cum = np.concatenate([[0.0], np.cumsum(pieces)])
        gx, gw = np.polynomial.legendre.leggauss(12)
        return nodes, cum, gx, gw

    # thin method aliases over the module-level functions
    def radial_pdf(self, r):
        return radial_pdf(self, r)

    def euclidean_pdf(self, d):
        return euclidean_pdf(self, d)

    def euclidean_cdf(self, d):
        return euclidean_cdf(self, d)

    def radial_cdf(self, r):
        return radial_cdf(self, r)

    def cdf_fast(self, d):
        return euclidean_cdf_fast(self, d)


def _scalar_or_array(x, out):
    return float(out) if np.ndim(x) == 0 else out


def polar_boundary_angle(m: DistanceModel, r: float) -> float:
    """Polar angle ``phi(r)`` where the circle of radius ``r`` about O crosses the rim.

    Only defined on the arccos branch of the radial support.
    """
    fp = m.fp
    lo, br, hi = m.radial_support
    if m.scenario is not Scenario.TILTED_OUTSIDE:
        lo = br
    tol = CLAMP_WINDOW * max(hi, 1.0)
    if not (lo - tol <= r <= hi + tol) or r <= 0:
        raise ValueError(f"r={r} outside the boundary-angle branch [{lo}, {hi}]")
    u = kernels.boundary_cos(float(r), fp.a, fp.b, fp.x0)
    if abs(u) > 1.0 + CLAMP_WINDOW:
        raise ValueError(f"arccos argument {u} outside [-1, 1] at r={r}")
    return math.acos(min(1.0, max(-1.0, u)))


def boundary_cos_literal(m: DistanceModel, r: float) -> float:
    """``(k1 + Lambda1(a, b, r)) / (ecc^2 a^2 r)`` evaluated term by term (ill-conditioned as ecc -> 0)."""
    fp = m.fp
    lam1 = fp.a * math.sqrt(max(fp.e2 * fp.a**2 * r * r - fp.k2sq, 0.0))
    return (fp.k1 + lam1) / (fp.e2 * fp.a**2 * r)


def radial_pdf(m: DistanceModel, r):
    """Density of the ground distance from O; zero outside the support."""
    a, b, x0, _, kind = m.params
    if np.ndim(r) == 0:
        return kernels.radial_pdf_k(float(r), a, b, x0, kind)
    return kernels.radial_pdf_array(r, a, b, x0, kind)


def euclidean_pdf(m: DistanceModel, d):
    """Density of the slant distance ``sqrt(r^2 + H^2)``; zero outside ``[d_min, d_max]``."""
    if np.ndim(d) == 0:
        return kernels.euclid_pdf_k(float(d), *m.params)
    return kernels.euclid_pdf_array(d, *m.params)


def _euclid_cdf_scalar(m: DistanceModel, d: float) -> float:
    d_min, d_br, d_max = m.bounds
    if d <= d_min:
        return 0.0
    if d >= d_max:
        return 1.0
    pts = (d_min, min(d, d_br), d)
    v, _ = integrate_split(kernels.integrand("euclid_pdf"), pts, m.params)
    return min(1.0, max(0.0, v))


def euclidean_cdf(m: DistanceModel, d):
    """CDF of the slant distance by adaptive quadrature of the density, split at ``d_break``."""
    if np.ndim(d) == 0:
        return _euclid_cdf_scalar(m, float(d))
    d = np.asarray(d, dtype=float)
    return np.array([_euclid_cdf_scalar(m, float(v)) for v in d.ravel()]).reshape(d.shape)


def euclidean_cdf_fast(m: DistanceModel, d):
    """Vectorised CDF for large sample arrays.

    Cumulative mass is tabulated once per model on a grid clustered at the
    square-root edges of the arccos branch; each query adds a 12-point
    Gauss-Legendre integral from the nearest node below.
    """
    nodes, cum, gx, gw = m._cdf_table
    out = kernels.cdf_table_eval(d, nodes, cum, gx, gw, *m.params)
    return _scalar_or_array(d, out)


def _radial_cdf_scalar(m: DistanceModel, r: float) -> float:
    lo, br, hi = m.radial_support
    if r <= lo:
        return 0.0
    if r >= hi:
        return 1.0
    a, b, x0, _, kind = m.params
    v, _ = integrate_split(kernels.integrand("radial_pdf"), (lo, min(r, br), r), (a, b, x0, kind))
    return min(1.0, max(0.0, v))


def radial_cdf(m: DistanceModel, r):
    if np.ndim(r) == 0:
        return _radial_cdf_scalar(m, float(r))
    r = np.asarray(r, dtype=float)
    return np.array([_radial_cdf_scalar(m, float(v)) for v in r.ravel()]).reshape(r.shape)


# ---------------------------------------------------------- closed forms --

def vertical_cdf_closed_form(m: DistanceModel, d):
    """Closed-form slant-distance CDF for the vertical footprint."""
    if m.scenario is not Scenario.VERTICAL:
        raise ValueError("closed form applies to the vertical scenario only")
    a, b, H = m.fp.a, m.fp.b, m.H
    d_min, d1, d_max = m.bounds
    d = np.asarray(d, dtype=float)
    r2 = np.maximum(d * d - H * H, 0.0)
    first = r2 / (a * b)
    if a == b:
        out = np.clip(first, 0.0, 1.0)
    else:
        e = m.fp.ecc
        q = math.sqrt(1.0 - e * e)
        s2 = np.maximum(d * d - d1 * d1, 0.0)
        with np.errstate(divide="ignore", invalid="ignore"):
            c_arg = np.clip(np.sqrt(s2) / (e * np.sqrt(r2)), -1.0, 1.0)
        s_arg = np.clip(np.sqrt(q * q * s2) / (b * e), -1.0, 1.0)
        second = (2 * r2 * q * np.arccos(c_arg) + 2 * b * b * np.arcsin(s_arg)) / (math.pi * a * b * q)
        out = np.where(d <= d1, first, second)
    out = np.where(d <= d_min, 0.0, np.where(d >= d_max, 1.0, out))
    return _scalar_or_array(d, out)


def tilted_cdf_closed_form(m: DistanceModel, d):
    """Tilted-footprint CDF transcribed term by term from the published closed form.

    Kept for cross-checking only; returns NaN where the printed expression
    leaves the real domain.
    """
    fp, H = m.fp, m.H
    a, b = fp.a, fp.b
    e = fp.ecc
    d_min, d1, d_max = m.bounds
    d = np.asarray(d, dtype=float)
    with np.errstate(all="ignore"):
        x = np.sqrt(np.maximum(d * d - H * H, 0.0))
        lam1 = a * np.sqrt(e * e * a * a * x * x - fp.k2sq)
        lam3 = np.sqrt(fp.k3 + fp.k4 * x * x - 2 * fp.k1 * lam1)
        acos_t = np.arccos(np.clip((fp.k1 + lam1) / (e * e * a * a * x), -1.0, 1.0))
        atan_t = np.arctan((-fp.k1 * e * e * a**4 - fp.k4 * lam1) / (fp.k9 * lam3))
        num = fp.k5 + fp.k6 * x * x - 2 * fp.k7 * lam1 + fp.k8 * lam3 * atan_t
        den = math.pi * a * b * fp.k10 * x * np.sqrt(1 + (fp.k1 - lam1) ** 2 / (e * e * a * a * x))
        lam2 = x * x * acos_t / (math.pi * a * b) - num / den
        second = 0.5 + (d * d - H * H) / (a * b) + lam2
        first = (d * d - H * H) / (a * b)
        if m.scenario is Scenario.TILTED_INSIDE:
            out = np.where(d <= d1, first, second)
        else:
            out = second
    out = np.where(d <= d_min, 0.0, np.where(d >= d_max, 1.0, out))
    return _scalar_or_array(d, out)


def closed_form_cross_check(m: DistanceModel, n: int = 200, tol: float = 1e-4) -> float:
    """Max |closed form - quadrature| over an interior grid.

    Disagreement beyond ``tol`` is logged, not raised: the tilted closed form
    is a transcription whose printed constants are not independently verified.
    """
    d_min, _, d_max = m.bounds
    grid = np.linspace(d_min, d_max, n + 2)[1:-1]
    ref = euclidean_cdf(m, grid)
    if m.scenario is Scenario.VERTICAL:
        alt = vertical_cdf_closed_form(m, grid)
    else:
        alt = tilted_cdf_closed_form(m, grid)
    diff = np.abs(np.asarray(alt) - ref)
    worst = float(np.nanmax(diff)) if np.any(np.isfinite(diff)) else math.inf
    if np.any(~np.isfinite(diff)):
        worst = math.inf
    if worst > tol:
        log.warning(
            "closed-form distance CDF disagrees with quadrature (%s, max |diff| = %.3g)",
            m.scenario.name, worst,
        )
    return worst
