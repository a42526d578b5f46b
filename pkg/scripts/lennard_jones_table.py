#!/usr/bin/env python3
"""Solve the bundled Lennard-Jones well and print the level table.

Reproduces energies over the well depth plus radial mean and spread for
all nineteen bound states (a couple of minutes of compute on one core).
"""

import sys
import time

from smx import make_builtin
from smx.spectrum import ScanConfig, solve_spectrum
from smx.wavefunction import build_wavefunction, expectation, std_dev_r


def main():
    model = make_builtin("lennard_jones")
    eps = model.unit_scale
    config = ScanConfig(e_min=-0.95 * eps, e_max=-0.01 * eps, n_grid=720,
                        order_m=50, lambda_order=52, ratio=500.0)
    t0 = time.perf_counter()
    roots = solve_spectrum(model, config)
    print(f"# {len(roots)} levels in {time.perf_counter() - t0:.1f} s")
    print(f"{'n':>3} {'E/eps':>20} {'<r>/sigma':>12} {'sigma_r/sigma':>14}")
    for n, root in enumerate(roots):
        psi = build_wavefunction(model, config, root)
        print(f"{n:>3} {root.energy / eps:>20.15f} "
              f"{expectation(psi, 1):>12.8f} {std_dev_r(psi):>14.8f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
