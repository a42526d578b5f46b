"""Fast invariant suite behind `smx selfcheck`.

Checks a few seconds' worth of structural invariants that break loudly
under almost any regression: slice unitarity, composition algebra, the
constant-potential triviality, and the harmonic-oscillator ground state.
"""

from __future__ import annotations

import numpy as np

from . import potential as _potential
from . import slices as _slices
from . import smatrix as _smatrix
from .spectrum import Bracket, ScanConfig, eval_condition, refine
from .taylor import TaylorSeries


def _random_slice(rng):
    # regime where the degree-lambda series has converged well past 1e-13
    order = rng.integers(0, 4)
    coeffs = rng.uniform(-1.5, 1.5, order + 1)
    coeffs[0] = rng.uniform(0.3, 4.0) * rng.choice([-1.0, 1.0])
    half = rng.uniform(0.05, 0.25)
    lam = int(rng.integers(15, 21))
    pair = _slices.local_solutions(TaylorSeries(0.0, coeffs), lam, half)
    k = rng.uniform(0.3, 3.0)
    return _slices.slice_smatrix(pair, k)


def check_unitarity(tries=200, seed=11):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(tries):
        sm = _random_slice(rng)
        defect = max(
            abs(abs(sm.s11) ** 2 + abs(sm.s21) ** 2 - 1.0),
            abs(abs(sm.s22) ** 2 + abs(sm.s12) ** 2 - 1.0),
        )
        worst = max(worst, defect)
    return worst <= 1e-12, f"unitarity defect {worst:.2e}"


def check_associativity(tries=100, seed=12):
    rng = np.random.default_rng(seed)

    def random_unitary_segment(xa, xb, k):
        th = rng.uniform(0.0, 2.0 * np.pi, 3)
        r = np.sqrt(rng.uniform(0.05, 0.95))
        t = np.sqrt(1.0 - r * r)
        s11 = r * np.exp(1j * th[0])
        s12 = t * np.exp(1j * th[1])
        s21 = t * np.exp(1j * th[1])
        s22 = -r * np.exp(1j * (2.0 * th[1] - th[0]))
        return _smatrix.SegmentS(s11, s12, s21, s22, xa, xb, k)

    worst = 0.0
    for _ in range(tries):
        a = random_unitary_segment(0.0, 1.0, 1.0)
        b = random_unitary_segment(1.0, 2.0, 1.0)
        c = random_unitary_segment(2.0, 3.0, 1.0)
        left = _smatrix.star(_smatrix.star(a, b), c)
        right = _smatrix.star(a, _smatrix.star(b, c))
        diff = max(
            abs(left.s11 - right.s11), abs(left.s12 - right.s12),
            abs(left.s21 - right.s21), abs(left.s22 - right.s22),
        )
        worst = max(worst, diff)
    return worst <= 1e-13, f"associativity defect {worst:.2e}"


def check_constant_slice():
    pair = _slices.local_solutions(TaylorSeries(0.0, [2.3]), 9, 0.25)
    tail = max(np.max(np.abs(pair.phi_plus[1:])), np.max(np.abs(pair.phi_minus[1:])))
    sm = _slices.slice_smatrix(pair, np.sqrt(2.3))
    free = np.exp(2j * np.sqrt(2.3) * 0.25)
    phase_err = max(abs(sm.s12 - free), abs(sm.s11))
    return tail == 0.0 and phase_err <= 1e-14, (
        f"phi tail {tail:.1e}, free-phase defect {phase_err:.2e}"
    )


def check_ho_ground_state():
    model = _potential.make_builtin("harmonic")
    config = ScanConfig(
        e_min=0.3, e_max=0.8, n_grid=2, order_m=2, lambda_order=12,
        delta=0.1, v0=0.0,
    ).resolve(model)
    f_lo = eval_condition(model, config, 0.4)
    f_hi = eval_condition(model, config, 0.62)
    root = refine(model, config, Bracket(0.4, 0.62, f_lo, f_hi))
    err = abs(root.energy - 0.5)
    return err <= 1e-12 and root.parity == "even", f"E0 error {err:.2e}"


def run(emit=print):
    """Run all checks; returns True iff everything passed."""
    checks = [
        ("slice unitarity", check_unitarity),
        ("star associativity", check_associativity),
        ("constant-slice triviality", check_constant_slice),
        ("harmonic ground state", check_ho_ground_state),
    ]
    ok = True
    for name, fn in checks:
        try:
            passed, detail = fn()
        except Exception as exc:  # a crash is a failure, not an abort
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        emit(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        ok = ok and passed
    return ok
