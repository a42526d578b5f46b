#!/usr/bin/env python3
"""Scan the right half-line phase of the harmonic oscillator over energy.

Writes E, Re S, Im S rows; the imaginary part crosses zero at the
eigenvalues (Re = +1 even states, Re = -1 odd states).

    python scripts/harmonic_phase_scan.py --points 400 > ho_phase.csv
"""

import argparse
import sys

import numpy as np

from smx import make_builtin
from smx.smatrix import Slicing, sweep_halfline


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--e-min", type=float, default=0.05)
    ap.add_argument("--e-max", type=float, default=10.0)
    ap.add_argument("--points", type=int, default=400)
    ap.add_argument("--delta", type=float, default=0.1)
    ap.add_argument("--lam", type=int, default=10)
    args = ap.parse_args()

    model = make_builtin("harmonic")
    slicing = Slicing(delta=args.delta)
    print("energy,re_s,im_s")
    for energy in np.linspace(args.e_min, args.e_max, args.points):
        phase, _ = sweep_halfline(model, energy, 0.0, "R", slicing, 1e-40,
                                  v0=0.0, order_m=2, lambda_order=args.lam)
        print(f"{energy:.10g},{phase.value.real:.17g},{phase.value.imag:.17g}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
