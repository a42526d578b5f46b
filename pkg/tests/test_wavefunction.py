import math

import numpy as np
import pytest

import smx
from smx.errors import ParameterError, RangeError
from smx.smatrix import sweep_halfline
from smx.wavefunction import (
    anchor_phase_ratio,
    build_wavefunction,
    count_nodes,
    expectation,
    normalize,
    reconstruct,
    sample,
    std_dev_r,
    _scale_piece,
)


def rebuild_raw(model, config, root):
    cfg = config.resolve(model)
    phase_r, trace = sweep_halfline(
        model, root.energy, cfg.x0, "R", cfg.slicing(), cfg.eps_trunc,
        v0=cfg.v0, order_m=cfg.order_m, lambda_order=cfg.lambda_order,
        keep_trace=True, max_slices=cfg.max_slices,
    )
    return reconstruct(model, cfg, root, trace, phase_r)


def continuity_defects(psi):
    vals, ders, amps, damps = [], [], [], []
    for a, b in zip(psi.pieces, psi.pieces[1:]):
        va = a.eval_scaled(1.0)
        vb = b.eval_scaled(-1.0)
        da = a.derivative_scaled(1.0) / a.half_width
        db = b.derivative_scaled(-1.0) / b.half_width
        vals.append(abs(va - vb))
        ders.append(abs(da - db))
    for p in psi.pieces:
        grid = np.linspace(-1.0, 1.0, 9)
        amps.append(np.max(np.abs(p.eval_scaled(grid))))
        damps.append(np.max(np.abs(p.derivative_scaled(grid))) / p.half_width)
    return max(vals) / max(amps), max(ders) / max(damps)


def ode_residual(model, psi, rng, points_per_piece=5):
    worst = 0.0
    for p in psi.pieces:
        taus = rng.uniform(-1.0, 1.0, points_per_piece)
        xs = p.center + taus * p.half_width
        vals = p.eval_scaled(taus)
        n = np.arange(len(p.merged))
        d2coef = (p.merged * n * (n - 1))[2:]
        second = np.array(
            [np.polyval(d2coef[::-1], t) for t in taus]
        ) / p.half_width**2
        w = np.array([2.0 * (psi.energy - model.value(x)) for x in xs])
        res = second + w * vals
        scale = np.max(np.abs(second)) + np.max(np.abs(w * vals))
        if scale > 0:
            worst = max(worst, np.max(np.abs(res)) / scale)
    return worst


def test_ho_ground_state_matches_gaussian(ho_model, ho_config_hi, ho_roots_hi):
    psi = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[0])
    xs = np.linspace(-4.0, 4.0, 481)
    exact = np.pi**-0.25 * np.exp(-(xs**2) / 2.0)
    rel = np.abs(sample(psi, xs) - exact) / exact
    assert rel.max() <= 1e-10


def test_ho_excited_state_matches_hermite(ho_model, ho_config_hi, ho_roots_hi):
    psi = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[3])
    xs = np.linspace(-5.0, 5.0, 301)
    h3 = np.polynomial.hermite.Hermite([0, 0, 0, 1.0])
    exact = h3(xs) * np.exp(-(xs**2) / 2.0) / math.sqrt(
        math.sqrt(math.pi) * 2**3 * math.factorial(3)
    )
    ours = sample(psi, xs)
    sign = np.sign(ours[220] * exact[220])
    assert np.max(np.abs(ours - sign * exact)) <= 1e-10 * np.max(np.abs(exact))


def test_hydrogen_u41_matches_laguerre(hyd_model, hyd_config, hyd_roots):
    from scipy.special import genlaguerre

    psi = build_wavefunction(hyd_model, hyd_config, hyd_roots[2])
    n, l = 4, 1
    norm = math.sqrt(
        (2.0 / n) ** 3 * math.factorial(n - l - 1) / (2.0 * n * math.factorial(n + l))
    )
    lag = genlaguerre(n - l - 1, 2 * l + 1)

    def u41(r):
        rho = 2.0 * r / n
        return r * norm * np.exp(-rho / 2.0) * rho**l * lag(rho)

    rs = np.linspace(0.3, 26.0, 600)
    ours = sample(psi, rs)
    exact = u41(rs)
    peak = np.argmax(np.abs(exact))
    sign = np.sign(ours[peak] * exact[peak])
    assert np.max(np.abs(ours - sign * exact)) <= 1e-8 * np.max(np.abs(exact))
    assert count_nodes(psi) == 2


def test_norm_is_unity_and_idempotent(ho_model, ho_config_hi, ho_roots_hi):
    raw = rebuild_raw(ho_model, ho_config_hi, ho_roots_hi[0])
    # A = 1 gives psi(x0) = 1 + S = 2, so the raw square integral is
    # 4 * integral of exp(-x^2) = 4 sqrt(pi)
    assert raw.norm == pytest.approx(4.0 * math.sqrt(math.pi), rel=1e-10)
    psi = normalize(raw)
    assert psi.norm == 1.0
    again = normalize(psi)
    xs = np.linspace(-3.0, 3.0, 41)
    assert np.allclose(sample(again, xs), sample(psi, xs), rtol=0, atol=1e-14)


def test_normalize_scaling_invariance(ho_model, ho_config_hi, ho_roots_hi):
    raw = rebuild_raw(ho_model, ho_config_hi, ho_roots_hi[1])
    from dataclasses import replace

    scaled = replace(raw, pieces=tuple(_scale_piece(p, -2.7j) for p in raw.pieces))
    a = normalize(raw)
    b = normalize(scaled)
    xs = np.linspace(-4.0, 4.0, 81)
    assert np.allclose(sample(a, xs), sample(b, xs), atol=1e-12)


def test_moments_of_ho_states(ho_model, ho_config_hi, ho_roots_hi):
    psi0 = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[0])
    assert expectation(psi0, 0) == pytest.approx(1.0, abs=1e-10)
    assert expectation(psi0, 1) == pytest.approx(0.0, abs=1e-12)
    assert expectation(psi0, 2) == pytest.approx(0.5, abs=1e-10)
    assert std_dev_r(psi0) == pytest.approx(math.sqrt(0.5), rel=1e-9)
    # virial: <x^2> = E_n for every oscillator state
    psi5 = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[5])
    assert expectation(psi5, 2) == pytest.approx(5.5, rel=1e-10)


def test_expectation_preconditions(ho_model, ho_config_hi, ho_roots_hi):
    raw = rebuild_raw(ho_model, ho_config_hi, ho_roots_hi[0])
    with pytest.raises(ParameterError):
        expectation(raw, 2)  # not normalized
    psi = normalize(raw)
    with pytest.raises(ParameterError):
        expectation(psi, -1)
    with pytest.raises(ParameterError):
        expectation(psi, 1.5)


def test_moment_overflow_is_range_error(lj_model, lj_config, lj_wavefunctions):
    with pytest.raises(RangeError):
        expectation(lj_wavefunctions[0], 3000)


def test_sample_edges_and_outside(ho_model, ho_config_hi, ho_roots_hi):
    psi = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[0])
    lo, hi = psi.span
    assert sample(psi, lo - 1.0) == 0.0
    assert sample(psi, hi + 1.0) == 0.0
    # edge values agree with both neighbours to the continuity tolerance
    amp = abs(sample(psi, 0.0))
    for piece in psi.pieces[1:-1]:
        edge = piece.center + piece.half_width
        left = piece.eval_scaled(1.0).real
        assert abs(sample(psi, edge) - left) <= 1e-9 * amp


def test_ho_n3_has_three_sign_changes(ho_model, ho_config_hi, ho_roots_hi):
    psi = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[3])
    xs = np.linspace(*psi.span, 2001)
    vals = sample(psi, xs)
    vals = vals[np.abs(vals) > 1e-8 * np.max(np.abs(vals))]
    flips = int(np.sum(np.sign(vals[:-1]) != np.sign(vals[1:])))
    assert flips == 3
    assert count_nodes(psi) == 3


def test_node_counts_match_quantum_number(ho_model, ho_config_hi, ho_roots_hi):
    for n, root in enumerate(ho_roots_hi):
        psi = build_wavefunction(ho_model, ho_config_hi, root)
        assert count_nodes(psi) == n


def test_parity_mirror_symmetry(ho_model, ho_config_hi, ho_roots_hi):
    xs = np.linspace(0.1, 4.1, 57)
    even = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[2])
    assert np.allclose(sample(even, xs), sample(even, -xs), rtol=0, atol=1e-13)
    odd = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[3])
    assert np.allclose(sample(odd, xs), -sample(odd, -xs), rtol=0, atol=1e-13)


def test_continuity_across_pieces(ho_model, ho_config_hi, ho_roots_hi,
                                  lj_model, lj_config, lj_wavefunctions):
    psi = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[4])
    val, der = continuity_defects(psi)
    assert val <= 1e-9 and der <= 1e-9
    val, der = continuity_defects(lj_wavefunctions[7])
    assert val <= 1e-9 and der <= 1e-9


def test_merged_polynomial_matches_unmerged_form(lj_wavefunctions):
    psi = lj_wavefunctions[3]
    for piece in psi.pieces[:: max(1, len(psi.pieces) // 17)]:
        for tau in (-1.0, 1.0):
            merged = piece.eval_scaled(tau)
            unmerged = piece.eval_unmerged(tau)
            scale = max(abs(merged), abs(unmerged))
            if scale > 0:
                assert abs(merged - unmerged) <= 1e-10 * scale


def test_anchor_phase_diagnostic(ho_model, ho_config_hi, ho_roots_hi,
                                 lj_wavefunctions):
    for root in ho_roots_hi[:4]:
        psi = build_wavefunction(ho_model, ho_config_hi, root)
        assert abs(anchor_phase_ratio(psi) - psi.phase_right) <= 1e-8
    for psi in lj_wavefunctions[:3]:
        assert abs(anchor_phase_ratio(psi) - psi.phase_right) <= 1e-8


def test_ode_residual_pointwise(ho_model, ho_config_hi, ho_roots_hi,
                                lj_model, lj_wavefunctions):
    rng = np.random.default_rng(42)
    psi = build_wavefunction(ho_model, ho_config_hi, ho_roots_hi[3])
    assert ode_residual(ho_model, psi, rng) <= 1e-8
    assert ode_residual(lj_model, lj_wavefunctions[0], rng) <= 1e-8


def test_tail_truncation_discards_negligible_norm(lj_model, lj_config,
                                                  lj_roots, lj_wavefunctions):
    psi = lj_wavefunctions[0]
    cutoff = psi.validity_cutoff
    last = psi.pieces[-1]
    tail_amp = abs(last.eval_scaled(1.0))
    kappa = math.sqrt(2.0 * (lj_model.value(min(cutoff, 199.0)) - psi.energy))
    discarded = tail_amp**2 / (2.0 * kappa)
    assert discarded < 1e-12


def test_junction_mismatch_warns_on_bad_energy(lj_model, lj_config, lj_roots):
    from dataclasses import replace

    bad = replace(lj_roots[0], energy=lj_roots[0].energy * (1.0 + 5e-7))
    with pytest.warns(UserWarning, match="disagree"):
        rebuild_raw(lj_model, lj_config, bad)


def test_validity_cutoffs_bound_the_support(lj_wavefunctions):
    psi = lj_wavefunctions[0]
    lo, hi = psi.span
    assert psi.validity_cutoff_left <= lo + 2.0 * psi.pieces[0].half_width
    assert hi <= psi.validity_cutoff + 1e-12
