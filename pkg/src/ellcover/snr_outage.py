"""SNR statistics under Nakagami-m fading averaged over the random user position.

All internal SNR quantities are linear; decibels are converted once at the
API boundary (``FadingChannel.gamma_bar_db`` and ``OutageQuery.gamma_th_db``).
"""
from __future__ import annotations

import dataclasses
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import integrate

from . import kernels
from .distance_stats import DistanceModel, Scenario
from .geometry import GeometryError, TiltedScenario, VerticalScenario
from .quadrature import integrate_split

log = logging.getLogger(__name__)

# below this the quadrature tolerance dominates the reported outage
QUADRATURE_FLOOR = 1e-10


@dataclass(frozen=True)
class Defaults:
    nu: float = 2.5
    H: float = 300.0
    gamma_bar_db: float = 95.0


DEFAULTS = Defaults()


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0) if np.ndim(x_db) else 10.0 ** (x_db / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class FadingChannel:
    """Nakagami shape ``m``, path-loss exponent ``nu`` and transmit SNR in dB."""

    m: float
    nu: float = DEFAULTS.nu
    gamma_bar_db: float = DEFAULTS.gamma_bar_db

    def __post_init__(self):
        if not self.m >= 0.5:
            raise ValueError(f"Nakagami shape must satisfy m >= 0.5, got {self.m}")
        if not self.nu > 0:
            raise ValueError(f"path-loss exponent must be positive, got {self.nu}")
        if not math.isfinite(self.gamma_bar_db):
            raise ValueError("transmit SNR must be finite")

    @property
    def gamma_bar(self) -> float:
        return 10.0 ** (self.gamma_bar_db / 10.0)

    def mean_snr(self, d):
        return self.gamma_bar / np.power(d, self.nu)


@dataclass(frozen=True)
class OutageQuery:
    channel: FadingChannel
    model: DistanceModel
    gamma_th_db: float

    def __post_init__(self):
        if not math.isfinite(self.gamma_th_db):
            raise ValueError("SNR threshold must be finite")

    @property
    def gamma_th(self) -> float:
        return 10.0 ** (self.gamma_th_db / 10.0)


class Outage(NamedTuple):
    p_out: float
    abserr: float
    below_floor: bool


# ------------------------------------------------------------ special fns --

def _check_gamma_args(s, x):
    if not s > 0:
        raise ValueError(f"shape must be positive, got s={s}")
    if not x >= 0:
        raise ValueError(f"argument must be non-negative, got x={x}")


def upper_incomplete_gamma(s: float, x: float) -> float:
    """``Gamma(s, x) = int_x^inf t^(s-1) e^-t dt`` (series below ``s+1``, continued fraction above)."""
    _check_gamma_args(s, x)
    return kernels.upper_gamma_k(float(s), float(x))


def regularized_lower_gamma(s: float, x: float) -> float:
    """``P(s, x) = 1 - Gamma(s, x) / Gamma(s)``."""
    _check_gamma_args(s, x)
    return kernels.lower_reg_gamma_k(float(s), float(x))


# ------------------------------------------------------------ SNR laws --

def conditional_snr_cdf(ch: FadingChannel, d, gamma):
    """P(SNR <= gamma | d): Nakagami power CDF around the mean SNR ``gamma_bar / d^nu``."""
    if np.ndim(d) == 0 and np.ndim(gamma) == 0:
        if not d > 0 or gamma < 0:
            raise ValueError("need d > 0 and gamma >= 0")
        return regularized_lower_gamma(ch.m, ch.m * gamma * d**ch.nu / ch.gamma_bar)
    d, gamma = np.broadcast_arrays(np.asarray(d, float), np.asarray(gamma, float))
    x = ch.m * gamma * d**ch.nu / ch.gamma_bar
    return np.array([kernels.lower_reg_gamma_k(ch.m, float(v)) for v in x.ravel()]).reshape(x.shape)


def _avg_over_distance(name, ch, model, gamma):
    params = model.params + (ch.m, ch.nu, ch.gamma_bar, float(gamma))
    return integrate_split(kernels.integrand(name), model.bounds, params)


def snr_pdf(ch: FadingChannel, model: DistanceModel, gamma) -> float:
    """Unconditional SNR density: conditional Nakagami density averaged over f_d."""
    if np.ndim(gamma):
        return np.array([snr_pdf(ch, model, float(g)) for g in np.ravel(gamma)]).reshape(np.shape(gamma))
    if gamma <= 0:
        return 0.0
    return max(_avg_over_distance("snr_pdf", ch, model, gamma)[0], 0.0)


def snr_cdf_with_error(ch: FadingChannel, model: DistanceModel, gamma: float) -> tuple[float, float]:
    if gamma <= 0:
        return 0.0, 0.0
    v, err = _avg_over_distance("snr_cdf", ch, model, gamma)
    return min(1.0, max(0.0, v)), err


def snr_cdf(ch: FadingChannel, model: DistanceModel, gamma):
    """Unconditional SNR CDF ``F(gamma) = E_d[P(m, m gamma d^nu / gamma_bar)]``."""
    if np.ndim(gamma):
        return np.array([snr_cdf_with_error(ch, model, float(g))[0] for g in np.ravel(gamma)]).reshape(
            np.shape(gamma)
        )
    return snr_cdf_with_error(ch, model, float(gamma))[0]


def outage_probability(q: OutageQuery) -> Outage:
    v, err = snr_cdf_with_error(q.channel, q.model, q.gamma_th)
    return Outage(v, err, v < QUADRATURE_FLOOR)


def no_fading_cdf(ch: FadingChannel, model: DistanceModel, gamma: float) -> float:
    """SNR CDF without fading: ``P(gamma_bar / d^nu <= gamma)``."""
    if gamma <= 0:
        return 0.0
    d_star = (ch.gamma_bar / gamma) ** (1.0 / ch.nu)
    return 1.0 - model.euclidean_cdf(d_star)


# ---------------------------------------------------- semi-closed forms --

def _second_branch_angle(model: DistanceModel, d, literal: bool):
    fp, H = model.fp, model.H
    r2 = d * d - H * H
    if model.scenario is Scenario.VERTICAL:
        d1 = model.bounds[1]
        arg = math.sqrt(max(d * d - d1 * d1, 0.0) / (fp.e2 * r2))
        return math.acos(min(1.0, arg))
    lam1 = fp.a * math.sqrt(max(fp.e2 * fp.a**2 * r2 - fp.k2sq, 0.0))
    den = fp.e2 * r2 if literal else fp.e2 * fp.a**2 * math.sqrt(r2)
    return math.acos(min(1.0, max(-1.0, (fp.k1 + lam1) / den)))


def _M(x, gamma, ch):
    t = gamma * ch.m * x**ch.nu / ch.gamma_bar
    s2 = ch.m + 2.0 / ch.nu
    return t ** (-2.0 / ch.nu) * kernels.upper_gamma_k(s2, t) - kernels.upper_gamma_k(ch.m, t)


def _second_branch_limits(ch, model, literal):
    _, d_br, d_max = model.bounds
    p = ch.nu / 2 if literal else ch.nu
    return ch.m * d_br**p / ch.gamma_bar, ch.m * d_max**p / ch.gamma_bar


def _prefactor(ch, model):
    k = 4.0 if model.scenario is Scenario.VERTICAL else 2.0
    fp = model.fp
    return k * ch.gamma_bar ** (2.0 / ch.nu) / (math.pi * fp.a * fp.b * ch.nu * math.gamma(ch.m) * ch.m ** (2.0 / ch.nu))


def _d_of_x(x, ch):
    return (x * ch.gamma_bar / ch.m) ** (1.0 / ch.nu)


def snr_cdf_semi_closed(ch: FadingChannel, model: DistanceModel, gamma: float, literal: bool = False) -> float:
    """Incomplete-gamma first-branch terms plus a numerically integrated remainder.

    The remainder ``int_0^gamma I(y) dy`` is evaluated with the order of
    integration swapped, which turns the inner ``y`` integral into
    ``Gamma(m) P(m, gamma x) / x^m``.  ``literal=True`` keeps the published
    ``d^(nu/2)`` integration limits and, for tilted footprints, the published
    arccos argument; the default uses the dimensionally consistent forms.
    """
    if gamma <= 0:
        return 0.0
    fp = model.fp
    d_min, d_br, _ = model.bounds
    a, b = fp.a, fp.b
    first = 0.0
    if d_br > d_min:
        first = (d_br**2 - d_min**2) / (a * b) - (
            d_min**2 * _M(d_min, gamma, ch) - d_br**2 * _M(d_br, gamma, ch)
        ) / (a * b * math.gamma(ch.m))
    lo, hi = _second_branch_limits(ch, model, literal)
    if hi <= lo:
        return first
    pref = _prefactor(ch, model) * math.gamma(ch.m)
    two_nu = 2.0 / ch.nu

    def f(x):
        d = _d_of_x(x, ch)
        return x ** (two_nu - 1.0) * kernels.lower_reg_gamma_k(ch.m, gamma * x) * _second_branch_angle(model, d, literal)

    v, _ = integrate.quad(f, lo, hi, epsabs=1e-14, epsrel=1e-11, limit=200)
    return first + pref * v


def snr_pdf_semi_closed(ch: FadingChannel, model: DistanceModel, gamma: float, literal: bool = False) -> float:
    """Incomplete-gamma first-branch density plus the numerically integrated remainder ``I(gamma)``."""
    if gamma <= 0:
        return 0.0
    fp = model.fp
    d_min, d_br, _ = model.bounds
    two_nu = 2.0 / ch.nu
    s2 = ch.m + two_nu
    first = 0.0
    if d_br > d_min:
        c = 2 * ch.gamma_bar**two_nu * gamma ** (-(ch.nu + 2) / ch.nu) / (
            fp.a * fp.b * ch.nu * math.gamma(ch.m) * ch.m**two_nu
        )
        t0 = gamma * ch.m * d_min**ch.nu / ch.gamma_bar
        t1 = gamma * ch.m * d_br**ch.nu / ch.gamma_bar
        first = c * (kernels.upper_gamma_k(s2, t0) - kernels.upper_gamma_k(s2, t1))
    lo, hi = _second_branch_limits(ch, model, literal)
    if hi <= lo:
        return first

    def f(x):
        d = _d_of_x(x, ch)
        return x ** (s2 - 1.0) * math.exp(-gamma * x) * _second_branch_angle(model, d, literal)

    v, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=1e-11, limit=200)
    return first + _prefactor(ch, model) * gamma ** (ch.m - 1.0) * v


def semi_closed_cross_check(ch, model, gammas, tol=1e-4, literal=False) -> float:
    """Max |semi-closed - direct| CDF gap over ``gammas``; gaps above ``tol`` are logged."""
    worst = 0.0
    for g in gammas:
        alt = snr_cdf_semi_closed(ch, model, g, literal=literal)
        gap = abs(alt - snr_cdf(ch, model, g)) if math.isfinite(alt) else math.inf
        worst = max(worst, gap)
    if worst > tol:
        log.warning("semi-closed SNR CDF disagrees with direct averaging (%s, literal=%s, max gap %.3g)",
                    model.scenario.name, literal, worst)
    return worst


# ----------------------------------------------------------------- sweeps --

SWEEP_AXES = ("psi", "theta", "H", "m", "gamma_th", "gamma_bar")


class SweepRow(NamedTuple):
    value: float
    p_out: float
    valid: bool
    below_floor: bool
    note: str


def _rebuild_model(model: DistanceModel, axis: str, value: float) -> DistanceModel:
    src = model.source
    if isinstance(src, TiltedScenario):
        kw = {"psi": src.psi, "theta": src.theta, "H": src.H}
        if axis in ("psi", "theta"):
            kw[axis] = math.radians(value)
        else:
            kw["H"] = value
        return DistanceModel.tilted(kw["H"], kw["theta"], kw["psi"])
    if isinstance(src, VerticalScenario) or model.scenario is Scenario.VERTICAL:
        if axis != "H":
            raise GeometryError(f"cannot sweep {axis} on a vertical footprint")
        return DistanceModel.vertical(model.fp.a, model.fp.b, value)
    if axis == "H":
        return DistanceModel(model.fp, value)
    raise GeometryError(f"cannot sweep {axis}: model was not built from a tilted scenario")


def query_at(base: OutageQuery, axis: str, value: float) -> OutageQuery:
    """``base`` with one parameter replaced; angles in degrees, SNRs in dB."""
    if axis in ("psi", "theta", "H"):
        return dataclasses.replace(base, model=_rebuild_model(base.model, axis, value))
    if axis == "m":
        return dataclasses.replace(base, channel=dataclasses.replace(base.channel, m=value))
    if axis == "gamma_bar":
        return dataclasses.replace(base, channel=dataclasses.replace(base.channel, gamma_bar_db=value))
    if axis == "gamma_th":
        return dataclasses.replace(base, gamma_th_db=value)
    raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")


def _sweep_point(base, axis, value) -> SweepRow:
    try:
        q = query_at(base, axis, value)
    except (GeometryError, ValueError) as exc:
        return SweepRow(value, math.nan, False, False, str(exc))
    out = outage_probability(q)
    return SweepRow(value, out.p_out, True, out.below_floor, "")


def outage_sweep(base: OutageQuery, axis: str, grid: Sequence[float], workers: int = 1) -> list[SweepRow]:
    """Outage probability along one parameter axis, in grid order.

    Invalid grid points produce a row with ``valid=False`` and the reason in ``note``.
    """
    if axis not in SWEEP_AXES:
        raise ValueError(f"unknown sweep axis {axis!r}; choose from {SWEEP_AXES}")
    grid = [float(v) for v in grid]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(lambda v: _sweep_point(base, axis, v), grid))
    return [_sweep_point(base, axis, v) for v in grid]


def crossing(xs, ys, target):
    """Linear interpolation (in log10 of ``ys``) of the first crossing of ``target``."""
    lt = math.log10(target)
    for (x0, y0), (x1, y1) in zip(zip(xs, ys), zip(xs[1:], ys[1:])):
        if y0 <= 0 or y1 <= 0:
            continue
        l0, l1 = math.log10(y0), math.log10(y1)
        if (l0 - lt) * (l1 - lt) <= 0 and l0 != l1:
            return x0 + (lt - l0) * (x1 - x0) / (l1 - l0)
    return math.nan
