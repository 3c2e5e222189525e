"""Elliptical ground footprints of a directional transmitter.

Two ways of producing a footprint are supported: a circular beam tilted away
from the vertical (the ellipse center is pushed along +x away from the ground
projection ``O`` of the transmitter) and a vertical beam with unequal
beamwidths (the ellipse is centred on ``O``).  All angles are radians.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

# cos^2(psi) - sin^2(theta) must exceed this for a usable ellipse
VALIDITY_MARGIN = 1e-9


class GeometryError(ValueError):
    """The requested transmitter geometry does not produce a bounded ellipse."""


@dataclass(frozen=True)
class TiltedScenario:
    """Circular-beam transmitter at altitude ``H`` tilted by ``psi``.

    Parameters
    ----------
    H : float
        Altitude in meters.
    theta : float
        Semi-apex angle of the beam cone, radians.
    psi : float
        Tilt of the cone axis from the vertical, radians.
    """

    H: float
    theta: float
    psi: float

    def __post_init__(self):
        if not (self.H > 0 and math.isfinite(self.H)):
            raise GeometryError(f"altitude must be positive, got H={self.H}")
        if not 0.0 < self.theta < math.pi / 2:
            raise GeometryError(f"semi-apex angle must lie in (0, pi/2), got {self.theta}")
        if not 0.0 <= self.psi < math.pi / 2:
            raise GeometryError(f"tilt angle must lie in [0, pi/2), got {self.psi}")
        if self.denominator <= VALIDITY_MARGIN:
            raise GeometryError(
                "cone does not cut the ground in an ellipse: psi + theta = "
                f"{math.degrees(self.psi + self.theta):.6g} deg must stay below 90 deg"
            )

    @classmethod
    def from_degrees(cls, H: float, theta_deg: float, psi_deg: float) -> "TiltedScenario":
        return cls(H, math.radians(theta_deg), math.radians(psi_deg))

    @property
    def denominator(self) -> float:
        return math.cos(self.psi) ** 2 - math.sin(self.theta) ** 2


@dataclass(frozen=True)
class VerticalScenario:
    """Vertical beam with unequal beamwidths; footprint centred below the transmitter."""

    a: float
    b: float
    H: float

    def __post_init__(self):
        for name in ("a", "b", "H"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise GeometryError(f"{name} must be positive and finite, got {v}")
        if self.b > self.a:
            raise GeometryError(f"semi-minor axis b={self.b} exceeds semi-major axis a={self.a}")


@dataclass(frozen=True)
class EllipseFootprint:
    """Ellipse ``b^2 (x - x0)^2 + a^2 y^2 <= a^2 b^2`` in ground coordinates.

    The origin is the ground projection of the transmitter.  ``k1``..``k10`` are
    the constants of the closed-form tilted distance CDF; ``k2`` is kept as its
    square because ``ecc^2 a^2 - x0^2`` turns negative once ``x0 > ecc * a``.
    """

    a: float
    b: float
    x0: float = 0.0
    ecc: float = field(init=False)
    area: float = field(init=False)
    k1: float = field(init=False)
    k2sq: float = field(init=False)
    k3: float = field(init=False)
    k4: float = field(init=False)
    k5: float = field(init=False)
    k6: float = field(init=False)
    k7: float = field(init=False)
    k8: float = field(init=False)
    k9: float = field(init=False)
    k10: float = field(init=False)

    def __post_init__(self):
        a, b, x0 = self.a, self.b, self.x0
        if not (a > 0 and b > 0 and math.isfinite(a) and math.isfinite(b)):
            raise GeometryError(f"semi-axes must be positive and finite, got a={a}, b={b}")
        if b > a * (1 + 1e-12):
            raise GeometryError(f"semi-minor axis b={b} exceeds semi-major axis a={a}")
        if x0 < 0 or not math.isfinite(x0):
            raise GeometryError(f"center offset must be finite and >= 0, got {x0}")
        b = min(b, a)
        e2 = max(0.0, 1.0 - (b / a) ** 2)
        ecc = math.sqrt(e2)
        one_m = 1.0 - e2
        k1 = -b * b * x0
        k2sq = b * b * (e2 * a * a - x0 * x0)
        k3 = a * k2sq - k1 * k1
        k4 = e2 * a**4 * one_m
        vals = dict(
            ecc=ecc,
            area=math.pi * a * b,
            k1=k1,
            k2sq=k2sq,
            k3=k3,
            k4=k4,
            k5=-(a**6) * ecc**3 * one_m * k1 * k3,
            k6=-k1 * a**12 * ecc**5 * one_m**2,
            k7=a**6 * ecc**3 * one_m * k1,
            k8=-(a**6) * ecc**3 * math.sqrt(one_m) * (one_m * a * a * k2sq + k1 * k1),
            k9=a**4 * e2 * math.sqrt(one_m),
            k10=-(a**12) * ecc**7 * one_m**2,
        )
        for k, v in vals.items():
            object.__setattr__(self, k, v)
        if x0 > 0:
            # Lambda_1 must be real where the arccos branch starts
            r_lo = abs(a - x0)
            if e2 * a * a * r_lo * r_lo - k2sq < -1e-9 * max(a, x0) ** 4:
                raise GeometryError("boundary-angle radicand negative at the support edge")

    @property
    def e2(self) -> float:
        return self.ecc * self.ecc

    def contains(self, x, y):
        """Vectorised point-in-ellipse test."""
        return self.b**2 * (x - self.x0) ** 2 + self.a**2 * y**2 <= self.a**2 * self.b**2


def footprint_from_tilt(s: TiltedScenario) -> EllipseFootprint:
    """Ground ellipse cut by a cone of half-angle ``theta`` tilted by ``psi``."""
    H, th, ps = s.H, s.theta, s.psi
    if ps == 0.0:
        R = H * math.tan(th)
        return EllipseFootprint(R, R, 0.0)
    den = s.denominator
    a = H * math.sin(2 * th) / (2 * den)
    b = min(H * math.sin(th) / math.sqrt(den), a)
    # midpoint of the near and far rim hits, H (tan(psi+theta) + tan(psi-theta)) / 2;
    # equals a -/+ H tan|theta-psi| without the cancellation at small psi
    x0 = H * math.sin(2 * ps) / (2 * den)
    return EllipseFootprint(a, b, x0)


def footprint_vertical(s: VerticalScenario) -> EllipseFootprint:
    return EllipseFootprint(s.a, s.b, 0.0)


def area_ratio_vs_circle(s: TiltedScenario) -> float:
    """Area of the tilted footprint over the area of the untilted (psi=0) disc."""
    fp = footprint_from_tilt(s)
    return fp.a * fp.b / (s.H * math.tan(s.theta)) ** 2


def equivalent_vertical_altitude(s: TiltedScenario) -> float:
    """Altitude at which a vertical beam of half-angle ``theta`` spans the same major axis.

    The vertical transmitter's elevation beamwidth is assumed to be adjusted so
    that it also reproduces the minor axis.
    """
    return footprint_from_tilt(s).a / math.tan(s.theta)


def support_bounds(fp: EllipseFootprint, H: float) -> tuple[float, float, float]:
    """``(d_min, d_break, d_max)`` of the slant distance from a transmitter at altitude ``H``.

    ``d_break`` ends the full-circle branch; when ``O`` lies outside the
    ellipse there is no such branch and ``d_break == d_min``.
    """
    a, b, x0 = fp.a, fp.b, fp.x0
    if x0 == 0.0:
        return H, math.hypot(b, H), math.hypot(a, H)
    d_max = math.hypot(a + x0, H)
    if x0 <= a:
        return H, math.hypot(a - x0, H), d_max
    d2 = math.hypot(x0 - a, H)
    return d2, d2, d_max


def rim_points(fp: EllipseFootprint) -> list[tuple[float, float]]:
    """Far vertex, near vertex and the two co-vertices of the footprint."""
    return [(fp.x0 + fp.a, 0.0), (fp.x0 - fp.a, 0.0), (fp.x0, fp.b), (fp.x0, -fp.b)]
