import csv
import math

import numpy as np
import pytest
from scipy import stats

from ellcover import rng
from ellcover.distance_stats import DistanceModel
from ellcover.montecarlo import (
    EmpiricalDistribution,
    SimConfig,
    binomial_sigma,
    ks_critical,
    ks_distance,
    sample_distance,
    sample_point_in_ellipse,
    sample_points,
    sample_snr,
    sample_snr_at_distance,
)
from ellcover.snr_outage import FadingChannel, db_to_linear, outage_probability, OutageQuery

TILTED = DistanceModel.tilted_deg(300, 30, 20)
OUTSIDE = DistanceModel.tilted_deg(300, 30, 40)


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(seed=1, n_samples=0, model=TILTED)
    with pytest.raises(ValueError):
        SimConfig(seed=1, n_samples=10, model=TILTED, method="grid")
    with pytest.raises(ValueError):
        sample_snr(SimConfig(seed=1, n_samples=10, model=TILTED))


class TestReproducibility:
    def test_bit_identical(self):
        cfg = SimConfig(seed=99, n_samples=300_000, model=TILTED, channel=FadingChannel(m=0.75))
        assert np.array_equal(sample_points(cfg)[0], sample_points(cfg)[0])
        assert np.array_equal(sample_snr(cfg).samples, sample_snr(cfg).samples)

    def test_worker_count_does_not_change_output(self):
        base = SimConfig(seed=4, n_samples=3 * rng.BLOCK + 17, model=OUTSIDE, channel=FadingChannel(m=2))
        par = SimConfig(seed=4, n_samples=base.n_samples, model=OUTSIDE, channel=base.channel, workers=4)
        for f in (lambda c: sample_points(c)[1], lambda c: sample_snr(c).samples):
            assert np.array_equal(f(base), f(par))

    def test_seeds_and_streams_differ(self):
        a = rng.generator(1, rng.POSITIONS).random(4)
        assert not np.array_equal(a, rng.generator(2, rng.POSITIONS).random(4))
        assert not np.array_equal(a, rng.generator(1, rng.FADING).random(4))
        assert not np.array_equal(a, rng.generator(1, rng.POSITIONS, block=1).random(4))

    def test_prefix_property(self):
        short = sample_points(SimConfig(seed=8, n_samples=1000, model=TILTED))[0]
        long = sample_points(SimConfig(seed=8, n_samples=5000, model=TILTED))[0]
        assert np.array_equal(short, long[:1000])

    def test_blocks_cover(self):
        parts = rng.blocks(2 * rng.BLOCK + 5)
        assert sum(s for _, s in parts) == 2 * rng.BLOCK + 5 and [i for i, _ in parts] == [0, 1, 2]


N_POS = 10**6


@pytest.fixture(scope="module", params=["disc", "rejection"])
def pts(request):
    return sample_points(SimConfig(seed=10, n_samples=N_POS, model=TILTED, method=request.param))


class TestPositions:
    N = N_POS

    def test_inside_ellipse(self, pts):
        fp = TILTED.fp
        x, y = pts
        assert np.all(fp.b**2 * (x - fp.x0) ** 2 + fp.a**2 * y**2 <= fp.a**2 * fp.b**2 * (1 + 1e-12))

    def test_mean_is_centre(self, pts):
        fp = TILTED.fp
        x, y = pts
        # var of x for a uniform ellipse is a^2 / 4
        assert abs(x.mean() - fp.x0) < 4 * fp.a / 2 / math.sqrt(self.N)
        assert abs(y.mean()) < 4 * fp.b / 2 / math.sqrt(self.N)

    def test_inscribed_circle_fraction(self, pts):
        fp = TILTED.fp
        x, y = pts
        p = fp.b / fp.a
        frac = np.mean((x - fp.x0) ** 2 + y**2 <= fp.b**2)
        assert abs(frac - p) < 4 * binomial_sigma(p, self.N)

    def test_chi_square_equal_area_cells(self, pts):
        fp = TILTED.fp
        x, y = pts
        u, v = (x - fp.x0) / fp.a, y / fp.b
        ring = np.minimum((u * u + v * v) * 20, 19.999999).astype(int)
        sector = np.minimum((np.arctan2(v, u) + math.pi) / (2 * math.pi) * 20, 19.999999).astype(int)
        counts = np.bincount(ring * 20 + sector, minlength=400)
        assert stats.chisquare(counts).pvalue > 1e-3

    def test_single_point_helper(self):
        fp = TILTED.fp
        gen = rng.generator(3)
        for _ in range(200):
            x, y = sample_point_in_ellipse(fp, gen)
            assert fp.contains(x, y)


class TestDistances:
    def test_support(self):
        emp = sample_distance(SimConfig(seed=2, n_samples=10**7, model=OUTSIDE))
        lo, _, hi = OUTSIDE.bounds
        assert lo <= emp.samples[0] and emp.samples[-1] <= hi
        assert emp.samples[0] < lo * 1.001 and emp.samples[-1] > hi * 0.999

    @pytest.mark.parametrize("method", ["disc", "rejection"])
    @pytest.mark.parametrize("model", [TILTED, OUTSIDE, DistanceModel.vertical(180, 90, 300)],
                             ids=["inside", "outside", "vertical"])
    def test_ks_against_analytic_cdf(self, model, method):
        n = 10**6
        emp = sample_distance(SimConfig(seed=31, n_samples=n, model=model, method=method))
        assert ks_distance(emp, model.cdf_fast) < ks_critical(n, slack=1.0)

    def test_circle_law(self):
        model = DistanceModel.vertical(180, 180, 300)
        n = 10**6
        emp = sample_distance(SimConfig(seed=5, n_samples=n, model=model))
        assert ks_distance(emp, lambda d: (d * d - 300.0**2) / 180.0**2) < ks_critical(n, slack=1.0)

    def test_csv_export(self, tmp_path):
        emp = sample_distance(SimConfig(seed=1, n_samples=50, model=TILTED))
        p = tmp_path / "d.csv"
        emp.to_csv(p, "distance_m")
        rows = list(csv.reader(open(p)))
        assert rows[0] == ["distance_m"] and len(rows) == 51
        assert np.array_equal([float(r[0]) for r in rows[1:]], emp.samples)


class TestSnr:
    @pytest.mark.parametrize("m", [0.5, 0.75, 4.0])
    def test_gamma_moments(self, m):
        ch = FadingChannel(m=m)
        n = 10**6
        d = 350.0
        x = sample_snr_at_distance(ch, d, n, seed=int(m * 100))
        scale = ch.mean_snr(d) / m
        mean, var = m * scale, m * scale**2
        assert abs(x.mean() - mean) < 5 * math.sqrt(var / n)
        # var of the sample variance for a gamma law: (mu4 - var^2) / n, mu4 = 3 m (m + 2) scale^4
        mu4 = 3 * m * (m + 2) * scale**4
        assert abs(x.var() - var) < 5 * math.sqrt((mu4 - var**2) / n)

    def test_rayleigh_is_exponential(self):
        ch = FadingChannel(m=1.0)
        n = 10**6
        d = 320.0
        emp = EmpiricalDistribution(sample_snr_at_distance(ch, d, n, seed=17))
        assert ks_distance(emp, lambda g: 1 - np.exp(-g * d**2.5 / ch.gamma_bar)) < ks_critical(n, slack=1.0)

    def test_outage_at_10db(self):
        ch = FadingChannel(m=1.0)
        n = 10**7
        q = OutageQuery(ch, TILTED, 10.0)
        p = outage_probability(q).p_out
        assert p >= 1e-3
        emp = sample_snr(SimConfig(seed=2024, n_samples=n, model=TILTED, channel=ch))
        assert abs(emp.cdf(q.gamma_th) - p) < 3 * binomial_sigma(p, n)

    def test_csv_header(self, tmp_path):
        emp = sample_snr(SimConfig(seed=1, n_samples=20, model=TILTED, channel=FadingChannel(m=2)))
        p = tmp_path / "s.csv"
        emp.to_csv(p, "snr_linear")
        assert open(p).readline().strip() == "snr_linear"


class TestKs:
    def test_uniform_calibration(self):
        n = 10**5
        emp = EmpiricalDistribution(rng.generator(123).random(n))
        assert ks_distance(emp, lambda x: x) < 1.63 / math.sqrt(n)

    def test_self_comparison(self):
        emp = EmpiricalDistribution(rng.generator(5).normal(size=1000))
        assert ks_distance(emp, emp.cdf) == pytest.approx(1.0 / emp.n, abs=1e-15)

    def test_matches_scipy(self):
        x = rng.generator(6).random(500) ** 2
        emp = EmpiricalDistribution(x)
        assert ks_distance(emp, np.sqrt) == pytest.approx(stats.kstest(x, np.sqrt).statistic, abs=1e-15)

    def test_empirical_cdf_ties(self):
        emp = EmpiricalDistribution([3.0, 1.0, 2.0, 2.0])
        assert list(emp.samples) == [1.0, 2.0, 2.0, 3.0]
        assert emp.cdf(2.0) == 0.75 and emp.fraction_below(2.0) == 0.25 and len(emp) == 4
