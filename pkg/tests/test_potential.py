import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import smx
from smx.errors import DomainError, ParameterError, SingularityError
from smx.potential import (
    BARRIER,
    Closure,
    expand,
    make_builtin,
    make_custom,
    scaled_term_batch,
)
from smx.taylor import taylor_coefficients


def test_harmonic_expansion_at_origin():
    model = make_builtin("harmonic")
    ts = expand(model, 0.5, 0.0, 2)
    assert np.allclose(ts.coeffs, [1.0, 0.0, -1.0], atol=1e-15)


def test_constant_potential_expansion():
    model = make_custom(lambda c, n: np.zeros(n + 1), (-1.0, 1.0),
                        (BARRIER, BARRIER), v_asymptotic=-1.0)
    ts = expand(model, 0.7, 0.2, 5)
    assert ts.coeffs[0] == pytest.approx(1.4, rel=1e-15)
    assert np.all(ts.coeffs[1:] == 0.0)


def test_lj_repulsive_term_matches_binomial_series():
    # (sigma/r)^12 about the potential minimum, against exact binomial
    # coefficients: mu-th term c (-1)^mu C(11+mu, mu) x^(-12-mu)
    model = make_builtin("lennard_jones")
    x = smx.LJ_MINIMUM
    order = 30
    eps = model.params["epsilon"]
    ts = expand(model, 0.0, x, order)
    oracle = np.zeros(order + 1)
    for mu in range(order + 1):
        rep = 4.0 * eps * (-1.0) ** mu * math.comb(11 + mu, mu) * x ** (-12.0 - mu)
        att = -4.0 * eps * (-1.0) ** mu * math.comb(5 + mu, mu) * x ** (-6.0 - mu)
        oracle[mu] = -2.0 * (rep + att)
    assert np.allclose(ts.coeffs, oracle, rtol=1e-14)


def test_expand_rejects_out_of_domain_center():
    model = make_builtin("lennard_jones")
    with pytest.raises(DomainError):
        expand(model, 0.0, 0.1, 4)
    with pytest.raises(DomainError):
        expand(model, 0.0, 500.0, 4)


def test_expand_overflow_near_pole_is_singularity_error():
    model = make_builtin("hydrogen_effective", l=1, h1=1e-12, h2=10.0)
    with pytest.raises(SingularityError):
        expand(model, -0.1, 2e-12, 50)


def test_builtin_parameter_validation():
    with pytest.raises(ParameterError):
        make_builtin("harmonic", omega=-1.0)
    with pytest.raises(ParameterError):
        make_builtin("lennard_jones", epsilon=0.0)
    with pytest.raises(ParameterError):
        make_builtin("hydrogen_effective", l=-2)
    with pytest.raises(ParameterError):
        make_builtin("hydrogen_effective", h1=3.0, h2=1.0)
    with pytest.raises(ParameterError):
        make_builtin("morse")
    with pytest.raises(ParameterError):
        make_builtin("harmonic", junk=1.0)


def test_builtin_closures_and_units():
    lj = make_builtin("lennard_jones")
    assert lj.left_closure.kind == "barrier"
    assert lj.right_closure == Closure("step", 0.0)
    assert lj.bound_ceiling == 0.0
    assert lj.x0_default == pytest.approx(2.0 ** (1.0 / 6.0))
    hyd = make_builtin("hydrogen_effective", l=1)
    assert hyd.x0_default == pytest.approx(2.0)
    ho = make_builtin("harmonic")
    assert ho.symmetric and math.isinf(ho.bound_ceiling)


def test_lj_value_and_minimum():
    lj = make_builtin("lennard_jones")
    eps = lj.params["epsilon"]
    assert lj.value(smx.LJ_MINIMUM) == pytest.approx(-eps, rel=1e-14)
    assert lj.value(1.0) == pytest.approx(0.0, abs=1e-9)


def test_custom_nan_provider_raises():
    model = make_custom(lambda c, n: np.full(n + 1, np.nan), (0.0, 2.0),
                        (BARRIER, BARRIER), v_asymptotic=-1.0)
    with pytest.raises(SingularityError):
        expand(model, 0.0, 1.0, 3)


def test_custom_taylor_engine_matches_builtin_lj():
    lj = make_builtin("lennard_jones")
    eps = lj.params["epsilon"]

    def provider(center, order):
        return taylor_coefficients(
            lambda r: 4.0 * eps * (r**-12 - r**-6), center, order
        )

    custom = make_custom(provider, (0.22, 200.0),
                         (BARRIER, Closure("step", 0.0)),
                         v_asymptotic=-1.1 * eps, x0_default=smx.LJ_MINIMUM)
    for x in (0.9, smx.LJ_MINIMUM, 2.5):
        a = expand(lj, -0.5 * eps, x, 40).coeffs
        b = expand(custom, -0.5 * eps, x, 40).coeffs
        assert np.allclose(a, b, rtol=1e-13)


@pytest.mark.parametrize("name,kwargs,x", [
    ("harmonic", {}, 1.7),
    ("hydrogen_effective", {"l": 1}, 3.0),
    ("lennard_jones", {}, 1.5),
])
def test_resummation_reproduces_direct_evaluation(name, kwargs, x):
    # shifting by delta = x/500 and resumming the degree-50 series must
    # reproduce a direct evaluation of the expanded term
    model = make_builtin(name, **kwargs)
    energy = 0.0
    ts = expand(model, energy, x, 50)
    for frac in (-1.0, -0.5, 0.5, 1.0):
        delta = frac * x / 500.0
        direct = 2.0 * (energy - model.value(x + delta))
        assert ts(x + delta) == pytest.approx(direct, rel=1e-12)


def test_expansion_linear_in_energy():
    model = make_builtin("lennard_jones")
    a = expand(model, -100.0, 1.3, 12).coeffs
    b = expand(model, -250.0, 1.3, 12).coeffs
    diff = a - b
    assert diff[0] == pytest.approx(2.0 * 150.0, rel=1e-15)
    assert np.all(diff[1:] == 0.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.05, 4.0), st.floats(-2.0, 8.0))
def test_harmonic_expansion_parity(x, energy):
    model = make_builtin("harmonic")
    plus = expand(model, energy, x, 6).coeffs
    minus = expand(model, energy, -x, 6).coeffs
    signs = (-1.0) ** np.arange(7)
    assert np.allclose(minus, signs * plus, rtol=1e-13, atol=1e-13)


def test_scaled_batch_matches_raw_expansion():
    model = make_builtin("lennard_jones")
    centers = np.array([0.9, 1.4, 3.0])
    halfs = centers / 500.0
    out = scaled_term_batch(model, -1000.0, centers, halfs, 20)
    for i, (c, d) in enumerate(zip(centers, halfs)):
        raw = expand(model, -1000.0, c, 20).coeffs
        assert np.allclose(out[i], raw * d ** (np.arange(21) + 2.0), rtol=1e-13)


def test_scaled_batch_is_finite_near_radial_pole():
    # raw coefficients overflow here; the scaled form must not
    model = make_builtin("hydrogen_effective", l=1)
    centers = np.array([1e-10, 5e-10])
    out = scaled_term_batch(model, -0.1, centers, centers / 100.0, 50)
    assert np.all(np.isfinite(out))
    assert np.max(np.abs(out)) < 10.0


def test_custom_lj_spectrum_agrees_with_builtin(lj_model):
    # same well expressed through the series engine: the ground level of
    # both models must coincide far below the refinement tolerance
    from smx.spectrum import Bracket, ScanConfig, eval_condition, refine

    eps = lj_model.params["epsilon"]

    def provider(center, order):
        return taylor_coefficients(
            lambda r: 4.0 * eps * (r**-12 - r**-6), center, order
        )

    custom = make_custom(provider, (0.22, 200.0),
                         (BARRIER, Closure("step", 0.0)),
                         v_asymptotic=-1.1 * eps, x0_default=smx.LJ_MINIMUM)
    config = ScanConfig(e_min=-0.95 * eps, e_max=-0.9 * eps, n_grid=2,
                        order_m=50, lambda_order=52, ratio=500.0)
    roots = {}
    for tag, model in (("builtin", lj_model), ("custom", custom)):
        cfg = config.resolve(model)
        lo, hi = -0.945 * eps, -0.937 * eps
        br = Bracket(lo, hi, eval_condition(model, cfg, lo),
                     eval_condition(model, cfg, hi))
        roots[tag] = refine(model, cfg, br).energy
    assert roots["custom"] == pytest.approx(roots["builtin"], rel=1e-13)
