"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 20]

Both flavours are imported side by side from ``dpcdf._kernels``, so the
environment flag does not matter here. The end-to-end row runs
``pp_estimate`` in a subprocess per backend, since the backend is fixed at
import time.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from dpcdf import _kernels

E2E = """
import timeit
from dpcdf import BACKEND
from dpcdf.core import RngSeed
from dpcdf.mechanisms import PrivacyParams
from dpcdf.metrics import DistributionSpec
from dpcdf.sampling import sample_distribution
from dpcdf.estimators import pp_estimate
data = sample_distribution(DistributionSpec("normal", (0, 1)), 10_000, RngSeed(0))
p = PrivacyParams(0.1, 1e-6)
pp_estimate(data, p, seed=RngSeed(1))
t = min(timeit.repeat(lambda: pp_estimate(data, p, seed=RngSeed(1)), number=1, repeat={repeat}))
print(BACKEND, t)
"""


def best(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    noisy_cdf = np.linspace(0, 1, 1000) + rng.normal(0, 0.05, 1000)
    x = rng.uniform(-1, 1, 10_000)
    grid = np.linspace(-1, 1, 1000)
    cases = [
        ("pav, 1000 noisy CDF values", _kernels.pav_numpy, _kernels.pav_numba, (noisy_cdf,)),
        ("power moments, N=1e4, K+1=7", _kernels.power_moments_numpy, _kernels.power_moments_numba, (x, 7)),
        ("legendre table, K=16, 1000 pts", _kernels.legendre_table_numpy, _kernels.legendre_table_numba, (16, grid)),
    ]
    print(f"{'kernel':34s} {'numpy ms':>10s} {'numba ms':>10s} {'speedup':>8s}")
    for name, f_np, f_nb, a in cases:
        assert np.allclose(f_np(*a), f_nb(*a), rtol=1e-12, atol=1e-14)
        t_np = best(lambda: f_np(*a), args.repeat)
        t_nb = best(lambda: f_nb(*a), args.repeat)
        print(f"{name:34s} {t_np * 1e3:10.3f} {t_nb * 1e3:10.3f} {t_np / t_nb:8.1f}x")

    times = {}
    for flag in ("0", "1"):
        env = {**os.environ, "DPCDF_DISABLE_NUMBA": flag}
        out = subprocess.run(
            [sys.executable, "-c", E2E.format(repeat=args.repeat)], env=env, capture_output=True, text=True, check=True
        ).stdout.split()
        times[out[0]] = float(out[1])
    print(
        f"{'pp_estimate end to end, N=1e4':34s} {times['numpy'] * 1e3:10.3f} {times['numba'] * 1e3:10.3f} "
        f"{times['numpy'] / times['numba']:8.1f}x"
    )


if __name__ == "__main__":
    main()
