"""Time the numba kernels against their pure-numpy counterparts.

    python benchmarks/bench_kernels.py [--repeat 20]

Numba timings exclude the first (compiling) call.
"""

import argparse
import timeit

import numpy as np

from monosense import _kernels as K


def cases(rng):
    x = rng.standard_normal(3920) + 1j * rng.standard_normal(3920)
    h = rng.standard_normal(60) + 1j * rng.standard_normal(60)
    r = x[:800]
    e = x[800:1600]
    delays = rng.uniform(0, 8, 8)
    coeffs = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    return {
        "fir_filter (3920 x 60)": ("fir_filter", (x, h)),
        "convolution_matrix (800 x 20)": ("convolution_matrix", (r, 20)),
        "lms_gradient (800 x 20)": ("lms_gradient", (r, e, 20)),
        "sinc_taps (8 paths, 64 taps)": ("sinc_taps", (delays, coeffs, 64, 20)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args(argv)
    if not K.HAVE_NUMBA:
        print("numba is not installed; only numpy timings are shown")
    rng = np.random.default_rng(0)
    print(f"{'kernel':32s} {'numpy us':>10s} {'numba us':>10s} {'speedup':>8s}")
    for label, (name, a) in cases(rng).items():
        f_np = getattr(K, name + "_numpy")
        t_np = min(timeit.repeat(lambda: f_np(*a), number=1, repeat=args.repeat)) * 1e6
        if K.HAVE_NUMBA:
            f_nb = getattr(K, name + "_numba")
            f_nb(*a)
            t_nb = min(timeit.repeat(lambda: f_nb(*a), number=1, repeat=args.repeat)) * 1e6
            print(f"{label:32s} {t_np:10.1f} {t_nb:10.1f} {t_np / t_nb:8.2f}")
        else:
            print(f"{label:32s} {t_np:10.1f} {'-':>10s} {'-':>8s}")


if __name__ == "__main__":
    main()
