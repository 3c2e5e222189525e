"""Adaptive Gauss-Kronrod integration split at known kinks (QUADPACK via scipy)."""
from __future__ import annotations

import warnings

from scipy import integrate

EPSREL = 1e-9
EPSABS = 1e-12
LIMIT = 60


def integrate_split(func, points, args=(), epsrel=EPSREL, epsabs=EPSABS, limit=LIMIT):
    """Integrate ``func`` over ``[points[0], points[-1]]`` piece by piece.

    Zero-width pieces are skipped.  Returns ``(value, abserr)``.
    """
    total = 0.0
    err = 0.0
    for lo, hi in zip(points[:-1], points[1:]):
        if hi <= lo:
            continue
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            v, e = integrate.quad(func, lo, hi, args=args, epsrel=epsrel, epsabs=epsabs, limit=limit)
        total += v
        err += e
    return total, err
