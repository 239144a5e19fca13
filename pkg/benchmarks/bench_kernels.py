"""Time the numba kernels against their numpy counterparts.

    python3 benchmarks/bench_kernels.py [--repeat 5]

The first numba call (compilation or cache load) is timed separately.
"""

import argparse
import time

import numpy as np

from geroch_pencil import catalog, kernels
from geroch_pencil.pencil import sample_sphere
from geroch_pencil.tensor_core import contract


def _best(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--samples", type=int, default=2000)
    args = ap.parse_args(argv)

    wave = catalog.wave().symbol
    ks = sample_sphere(3, args.samples, 0)
    n0, nk = wave.coeffs[0], contract(wave, ks[0])
    lams = np.arange(-2.0, 2.0, 1e-3)
    cases = [
        ("contract_many", kernels.contract_many_numpy, kernels.contract_many_numba, (wave.coeffs, ks)),
        ("geroch_operator", kernels.geroch_operator_numpy, kernels.geroch_operator_numba, (wave.coeffs,)),
        ("sigma_min_scan", kernels.sigma_min_scan_numpy, kernels.sigma_min_scan_numba, (n0, nk, lams)),
    ]
    print(f"numba active by default: {kernels.USE_NUMBA}")
    print(f"{'kernel':<16} {'first numba':>12} {'numba':>10} {'numpy':>10} {'ratio':>7}  agree")
    for name, f_np, f_nb, fargs in cases:
        t0 = time.perf_counter()
        out_nb = f_nb(*fargs)
        first = time.perf_counter() - t0
        out_np = f_np(*fargs)
        t_nb = _best(lambda: f_nb(*fargs), args.repeat)
        t_np = _best(lambda: f_np(*fargs), args.repeat)
        agree = np.allclose(out_nb, out_np, atol=1e-10)
        print(f"{name:<16} {first:12.4f} {t_nb:10.5f} {t_np:10.5f} {t_np / t_nb:7.2f}  {agree}")


if __name__ == "__main__":
    main()
