#!/usr/bin/env python3
"""Radial hydrogen levels for l = 1 and their Rydberg-series residuals.

For each found level prints E_n, the principal quantum number, and
n^2 E_n / E_1 which should equal one.
"""

import sys
import time

from smx import make_builtin
from smx.spectrum import ScanConfig, solve_spectrum


def main():
    model = make_builtin("hydrogen_effective", l=1, h1=9.7844e-11, h2=20200.0)
    config = ScanConfig(e_min=-0.13, e_max=-0.0045, n_grid=600,
                        order_m=50, lambda_order=52, ratio=100.0,
                        x0=2.0, v0=-0.6)
    t0 = time.perf_counter()
    roots = solve_spectrum(model, config)
    print(f"# {len(roots)} levels in {time.perf_counter() - t0:.1f} s")
    print(f"{'n':>3} {'E (hartree-like)':>22} {'n^2 E/E_1':>22}")
    for i, root in enumerate(roots):
        n = i + 2
        print(f"{n:>3} {root.energy:>22.15e} {n * n * root.energy / -0.5:>22.16f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
