"""Monte-Carlo oracle: uniform users in the footprint, Nakagami power draws, KS checks."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import kernels, rng
from .distance_stats import DistanceModel
from .geometry import EllipseFootprint
from .snr_outage import FadingChannel

KS_C01 = 1.63  # asymptotic 1% critical value of sqrt(n) * D


def ks_critical(n: int, slack: float = 1.5) -> float:
    return KS_C01 / math.sqrt(n) * slack


@dataclass(frozen=True)
class SimConfig:
    seed: int
    n_samples: int
    model: DistanceModel
    channel: Optional[FadingChannel] = None
    workers: int = 1
    method: str = "disc"  # or "rejection"

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be >= 1")
        if self.method not in ("disc", "rejection"):
            raise ValueError(f"unknown sampler {self.method!r}")


class EmpiricalDistribution:
    """Sorted sample with empirical-CDF queries."""

    def __init__(self, samples):
        self.samples = np.sort(np.asarray(samples, dtype=float).ravel())
        self.n = self.samples.size

    def __len__(self):
        return self.n

    def cdf(self, x):
        """Fraction of samples ``<= x``."""
        out = np.searchsorted(self.samples, x, side="right") / self.n
        return float(out) if np.ndim(x) == 0 else out

    def fraction_below(self, x) -> float:
        """Fraction of samples strictly below ``x``."""
        return float(np.searchsorted(self.samples, x, side="left") / self.n)

    def histogram(self, edges):
        """Density-normalised histogram over the whole sample (mass outside ``edges`` counts)."""
        counts = np.diff(np.searchsorted(self.samples, edges, side="left"))
        return counts / (self.n * np.diff(edges))

    def to_csv(self, path, header: str):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([header])
            for v in self.samples:
                w.writerow([repr(float(v))])


def sample_point_in_ellipse(fp: EllipseFootprint, gen: np.random.Generator) -> tuple[float, float]:
    """One uniform point: unit-disc draw stretched by ``(a, b)`` and shifted by ``x0``."""
    u1, u2 = gen.random(2)
    rho = math.sqrt(u1)
    ang = 2.0 * math.pi * u2
    return fp.x0 + fp.a * rho * math.cos(ang), fp.b * rho * math.sin(ang)


def _rejection_block(fp, H, gen, size):
    xs, ys = [], []
    got = 0
    while got < size:
        k = max(16, int((size - got) * 1.35))
        u = gen.random((k, 2)) * 2.0 - 1.0
        keep = u[:, 0] ** 2 + u[:, 1] ** 2 <= 1.0
        u = u[keep][: size - got]
        xs.append(fp.x0 + fp.a * u[:, 0])
        ys.append(fp.b * u[:, 1])
        got += u.shape[0]
    x, y = np.concatenate(xs), np.concatenate(ys)
    return x, y, np.sqrt(x * x + y * y + H * H)


def _position_block(cfg: SimConfig, index: int, size: int):
    fp, H = cfg.model.fp, cfg.model.H
    if cfg.method == "rejection":
        return _rejection_block(fp, H, rng.generator(cfg.seed, rng.REJECTION, index), size)
    # interleaved pairs, so a shorter run is a prefix of a longer one
    u = rng.generator(cfg.seed, rng.POSITIONS, index).random((size, 2))
    return kernels.disc_to_distance(u[:, 0].copy(), u[:, 1].copy(), fp.a, fp.b, fp.x0, H)


def sample_points(cfg: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Ground coordinates of ``n_samples`` uniform users, in generation order."""
    parts = rng.map_blocks(lambda i, s: _position_block(cfg, i, s)[:2], cfg.n_samples, cfg.workers)
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _raw_distances(cfg: SimConfig) -> np.ndarray:
    parts = rng.map_blocks(lambda i, s: _position_block(cfg, i, s)[2], cfg.n_samples, cfg.workers)
    return np.concatenate(parts)


def sample_distance(cfg: SimConfig) -> EmpiricalDistribution:
    """Slant distances from the transmitter to uniform users."""
    return EmpiricalDistribution(_raw_distances(cfg))


def _snr_block(cfg: SimConfig, index: int, size: int):
    ch = cfg.channel
    d = _position_block(cfg, index, size)[2]
    power = rng.generator(cfg.seed, rng.FADING, index).standard_gamma(ch.m, size)
    return power * (ch.gamma_bar / ch.m) / d**ch.nu


def sample_snr(cfg: SimConfig) -> EmpiricalDistribution:
    """Instantaneous SNR: gamma(shape m, scale mean/m) power around ``gamma_bar / d^nu``."""
    if cfg.channel is None:
        raise ValueError("sample_snr needs a FadingChannel in the config")
    parts = rng.map_blocks(lambda i, s: _snr_block(cfg, i, s), cfg.n_samples, cfg.workers)
    return EmpiricalDistribution(np.concatenate(parts))


def sample_snr_at_distance(ch: FadingChannel, d: float, n: int, seed: int) -> np.ndarray:
    """SNR draws for a user pinned at slant distance ``d``."""
    power = rng.generator(seed, rng.FADING, 0).standard_gamma(ch.m, n)
    return power * (ch.gamma_bar / ch.m) / d**ch.nu


def ks_distance(emp: EmpiricalDistribution, cdf: Callable) -> float:
    """Two-sided one-sample KS statistic against a vectorised analytic CDF."""
    if emp.n < 1:
        raise ValueError("empty sample")
    return kernels.ks_statistic(np.asarray(cdf(emp.samples), dtype=float))


def binomial_sigma(p: float, n: int) -> float:
    return math.sqrt(max(p * (1.0 - p), 0.0) / n)
