"""Reduced-size oracle suite behind ``ellcover selftest``."""
from __future__ import annotations

import math
import time
from typing import Callable, NamedTuple

import numpy as np
from scipy import integrate

from . import geometry as geo
from .distance_stats import DistanceModel, closed_form_cross_check
from .montecarlo import SimConfig, binomial_sigma, ks_critical, ks_distance, sample_distance, sample_snr
from .quadrature import integrate_split
from . import kernels
from .snr_outage import FadingChannel, OutageQuery, outage_probability, semi_closed_cross_check, snr_cdf


class CheckResult(NamedTuple):
    name: str
    passed: bool
    detail: str
    seconds: float


FIG4 = [(300.0, 30.0, p) for p in (10.0, 20.0, 30.0, 40.0)]
FIG7 = [(180.0, 90.0, 300.0), (180.0, 180.0, 300.0)]


def _models():
    out = [DistanceModel.tilted_deg(*c) for c in FIG4]
    out += [DistanceModel.vertical(*c) for c in FIG7]
    return out


def _check_geometry(scale):
    got = []
    for psi, (a_ref, b_ref) in ((20, (205.2, 188.5)), (40, (385.6, 258.5))):
        fp = geo.footprint_from_tilt(geo.TiltedScenario.from_degrees(300, 30, psi))
        got.append(max(abs(fp.a - a_ref), abs(fp.b - b_ref)))
    err = max(got)
    return err <= 0.1 * scale, f"max_axis_err={err:.4f} tol={0.1 * scale:g}"


def _check_altitude(scale):
    h1 = geo.equivalent_vertical_altitude(geo.TiltedScenario.from_degrees(300, 30, 20))
    h2 = geo.equivalent_vertical_altitude(geo.TiltedScenario.from_degrees(300, 30, 40))
    ok = abs(h1 - 355.4) <= 0.5 * scale and abs(h2 - 668) <= 1.0 * scale
    return ok, f"H_v=({h1:.2f}, {h2:.2f})"


def _check_normalization(scale):
    worst = 0.0
    models = _models() + [DistanceModel.tilted_deg(450, th, ps) for th, ps in ((15, 40), (40, 10), (25, 25))]
    for m in models:
        a, b, x0, H, kind = m.params
        lo, br, hi = m.radial_support
        fr = integrate_split(kernels.integrand("radial_pdf"), (lo, br, hi), (a, b, x0, kind))[0]
        fd = integrate_split(kernels.integrand("euclid_pdf"), m.bounds, m.params)[0]
        worst = max(worst, abs(fr - 1), abs(fd - 1))
    return worst <= 1e-7 * scale, f"max|int-1|={worst:.3e}"


def _check_circle(scale):
    m = DistanceModel.vertical(180.0, 180.0, 300.0)
    d = np.linspace(m.bounds[0], m.bounds[2], 200)
    pdf_err = np.max(np.abs(m.euclidean_pdf(d) - 2 * d / 180.0**2))
    cdf_err = np.max(np.abs(m.euclidean_cdf(d) - (d * d - 300.0**2) / 180.0**2))
    err = max(pdf_err, cdf_err)
    return err <= 1e-9 * scale, f"max_err={err:.3e}"


def _check_closed_form(scale):
    worst = max(closed_form_cross_check(DistanceModel.vertical(*c)) for c in FIG7 + [(205.2, 188.5, 300.0)])
    return worst <= 1e-6 * scale, f"max_gap={worst:.3e}"


def _check_ks(n, slack, scale):
    lines = []
    ok = True
    crit = ks_critical(n, slack) * scale
    for i, m in enumerate(_models()):
        emp = sample_distance(SimConfig(seed=1000 + i, n_samples=n, model=m))
        D = ks_distance(emp, m.cdf_fast)
        ok &= D < crit
        lines.append(f"{D:.5f}")
    return ok, f"D=[{', '.join(lines)}] crit={crit:.5f}"


def _check_semi_closed(scale):
    ch = FadingChannel(4 / 3)
    m = DistanceModel.vertical(205.2, 188.5, 300.0)
    gap = semi_closed_cross_check(ch, m, [3.0, 30.0, 300.0])
    return gap <= 1e-5 * scale, f"max_gap={gap:.3e}"


def _check_gamma_kernel(scale):
    ref, _ = integrate.quad(lambda t: t**1.5 * math.exp(-t), 1.3, 60.0, epsabs=0, epsrel=1e-13, limit=200)
    err = abs(kernels.upper_gamma_k(2.5, 1.3) - ref) / ref
    return err <= 1e-10 * scale, f"rel_err={err:.3e}"


def _check_mc_outage(n, scale):
    m = DistanceModel.tilted_deg(300.0, 40.0, 30.0)
    ch = FadingChannel(1.0)
    q = OutageQuery(ch, m, 10.0)
    p = outage_probability(q).p_out
    emp = sample_snr(SimConfig(seed=77, n_samples=n, model=m, channel=ch)).fraction_below(q.gamma_th)
    sig = binomial_sigma(p, n)
    return abs(emp - p) <= 3 * sig * scale, f"analytic={p:.5e} mc={emp:.5e} sigma={sig:.2e}"


def _check_snr_limit(scale):
    m = DistanceModel.tilted_deg(300.0, 30.0, 20.0)
    ch = FadingChannel(4.0)
    v = snr_cdf(ch, m, ch.gamma_bar * 1e6)
    return abs(1 - v) <= 1e-9 * scale, f"F(1e6*gamma_bar)={v:.12f}"


def run(quick: bool = False, inject_failure: bool = False, progress: Callable | None = None):
    """Run every check; returns the list of :class:`CheckResult`."""
    n = 100_000 if quick else 1_000_000
    slack = 2.0 if quick else 1.5
    checks = [
        ("geometry_golden", lambda s: _check_geometry(s)),
        ("equivalent_altitude", lambda s: _check_altitude(s)),
        ("normalization", lambda s: _check_normalization(s)),
        ("circle_limit", lambda s: _check_circle(s)),
        ("vertical_closed_form", lambda s: _check_closed_form(s)),
        ("incomplete_gamma", lambda s: _check_gamma_kernel(s)),
        ("snr_cdf_limit", lambda s: _check_snr_limit(s)),
        ("semi_closed_snr", lambda s: _check_semi_closed(s)),
        (f"ks_distance_n{n}", lambda s: _check_ks(n, slack, s)),
        (f"mc_outage_n{n * 4}", lambda s: _check_mc_outage(n * 4, s)),
    ]
    results = []
    for i, (name, fn) in enumerate(checks):
        # a negative tolerance scale can never be met
        scale = -1.0 if (inject_failure and i == 0) else 1.0
        t0 = time.perf_counter()
        ok, detail = fn(scale)
        res = CheckResult(name, bool(ok), detail, time.perf_counter() - t0)
        results.append(res)
        if progress is not None:
            progress(res)
    return results
