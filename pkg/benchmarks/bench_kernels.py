"""Compare the numba kernels with their pure-numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from ellcover import _accel, kernels
from ellcover.distance_stats import DistanceModel
from ellcover.quadrature import integrate_split
from ellcover.snr_outage import FadingChannel, db_to_linear


def best(fn, repeat):
    fn()  # warm-up, includes JIT compilation
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def cases(model, ch):
    a, b, x0, H, kind = model.params
    d = np.linspace(model.bounds[0], model.bounds[2], 200_000)
    r = np.sqrt(d * d - H * H)
    nodes, cum, gx, gw = model._cdf_table
    u1, u2 = np.random.default_rng(0).random((2, 1_000_000))
    f = np.sort(np.random.default_rng(1).random(1_000_000))
    yield "euclid_pdf 2e5", lambda: kernels._euclid_pdf_loop(d, a, b, x0, H, kind), \
        lambda: kernels._euclid_pdf_np(d, a, b, x0, H, kind)
    yield "radial_pdf 2e5", lambda: kernels._radial_pdf_loop(r, a, b, x0, kind), \
        lambda: kernels._radial_pdf_np(r, a, b, x0, kind)
    tab = (nodes, cum, gx, gw, a, b, x0, H, kind)
    yield "cdf table 2e5", lambda: kernels._cdf_table_loop(d, *tab), lambda: kernels._cdf_table_np(d, *tab)
    yield "disc->distance 1e6", lambda: kernels._disc_to_distance_loop(u1, u2, a, b, x0, H), \
        lambda: kernels._disc_to_distance_np(u1, u2, a, b, x0, H)
    yield "KS statistic 1e6", lambda: kernels._ks_loop(f), lambda: kernels._ks_np(f)
    args = model.params + (ch.m, ch.nu, ch.gamma_bar, db_to_linear(15.0))
    py = kernels.snr_cdf_integrand_k.py_func
    yield "snr_cdf quad x20", \
        lambda: [integrate_split(kernels.integrand("snr_cdf"), model.bounds, args) for _ in range(20)], \
        lambda: [integrate_split(py, model.bounds, args) for _ in range(20)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not _accel.NUMBA_OK:
        raise SystemExit("numba backend unavailable or disabled; nothing to compare")
    model = DistanceModel.tilted_deg(300, 30, 40)
    ch = FadingChannel(m=4 / 3)
    print(f"{'kernel':<20}{'numba [ms]':>12}{'numpy [ms]':>12}{'speed-up':>10}")
    for name, fast, slow in cases(model, ch):
        tf, ts = best(fast, args.repeat), best(slow, args.repeat)
        print(f"{name:<20}{tf * 1e3:>12.2f}{ts * 1e3:>12.2f}{ts / tf:>9.1f}x")


if __name__ == "__main__":
    main()
