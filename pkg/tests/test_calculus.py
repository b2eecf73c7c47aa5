import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonharm.calculus import (CalculusError, SeparableAmplitude, adjoint_exact, adjoint_symbol,
                              amplitude_to_symbol, asymptotic_sum, asymptotic_sum_orders,
                              classify_symbol, compose_exact, compose_symbols, fit_order,
                              lstar_to_l_symbol, require_rho_gt_delta)
from nonharm.differences import make_family
from nonharm.quantize import QuantizeError, Symbol, generated_symbol, multiplier_symbol
from nonharm.spectral_model import build_model


@pytest.fixture(scope="module", params=["periodic", "h-model"])
def mid_model(request):
    """Xi = 32 gives the reliable band enough points for slope fits."""
    return build_model(request.param, 32, h=2.0, nodes=256)


@pytest.fixture(scope="module")
def fam(mid_model):
    return make_family("exp_diff", mid_model.grid)


def sym(model, expr):
    return generated_symbol(model, expr)


@pytest.mark.parametrize("rho,delta", [(0.5, 0.5), (0.3, 0.7)])
def test_rho_not_above_delta_refused(mid_model, fam, rho, delta):
    with pytest.raises(CalculusError):
        require_rho_gt_delta(rho, delta)
    with pytest.raises(CalculusError):
        compose_symbols(mid_model, sym(mid_model, "one"), sym(mid_model, "one"), 2, fam, rho, delta)
    with pytest.raises(CalculusError):
        adjoint_symbol(mid_model, sym(mid_model, "one"), 2, fam, rho, delta)


@pytest.mark.parametrize("expr,order", [("lambda", 1.0), ("poly_decay(2)", -2.0),
                                        ("xdep(sin)*poly_decay(1)", -1.0)])
def test_classify_recovers_order(mid_model, fam, expr, order):
    rep = classify_symbol(mid_model, sym(mid_model, expr), order, fam=fam)
    assert abs(rep.m_fit - order) < 0.3
    assert rep.verdict


def test_classify_differences_gain_decay(mid_model, fam):
    rep = classify_symbol(mid_model, sym(mid_model, "xdep(sin)*poly_decay(1)"), -1.0, fam=fam)
    for al in range(rep.slopes.shape[0]):
        assert rep.slopes[al, 0] <= -1.0 - al + 0.3


def test_classify_rejects_understated_order(mid_model, fam):
    assert not classify_symbol(mid_model, sym(mid_model, "lambda"), 0.0, fam=fam).verdict


def test_classify_smoothing_symbol(mid_model, fam):
    assert classify_symbol(mid_model, sym(mid_model, "gauss_decay(4)"), -10.0, fam=fam).verdict


def test_fit_order_vanishing(mid_model):
    fit = fit_order(mid_model, np.zeros(mid_model.size), 1.0)
    assert fit.vanishing and fit.exponent == -np.inf


def test_asymptotic_sum(mid_model):
    parts = [sym(mid_model, f"poly_decay({k})") for k in range(4)]
    total = asymptotic_sum(parts)
    assert np.allclose(total.table, sum(p.table for p in parts))
    orders = [f.exponent for f in asymptotic_sum_orders(mid_model, parts)]
    assert all(b < a for a, b in zip(orders, orders[1:]))


@settings(max_examples=10, deadline=None)
@given(perm=st.permutations(range(3)))
def test_asymptotic_sum_ignores_order_of_terms(mid_model, perm):
    parts = [sym(mid_model, e) for e in ("lambda", "xdep(sin)", "poly_decay(1)")]
    a = asymptotic_sum(parts).table
    b = asymptotic_sum([parts[i] for i in perm]).table
    assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_mixed_flavors_refused(mid_model):
    a = sym(mid_model, "one")
    with pytest.raises(QuantizeError):
        asymptotic_sum([a, Symbol(a.table, flavor="L*")])


def test_multiplier_product_exact(mid_model, fam, rng):
    n = mid_model.size
    a = multiplier_symbol(mid_model, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    b = multiplier_symbol(mid_model, rng.standard_normal(n) + 1j * rng.standard_normal(n))
    res = compose_symbols(mid_model, a, b, 1, fam)
    scale = np.max(np.abs(res.truncated.filled()))
    assert np.max(np.abs(res.exact.filled() - res.truncated.filled())) < 1e-10 * scale


def test_x_only_times_multiplier_is_exact(mid_model, fam):
    a, b = sym(mid_model, "xdep(cos)"), sym(mid_model, "poly_decay(1)")
    exact = compose_exact(mid_model, a, b)
    assert np.max(np.abs(exact.table - a.table * b.table)) < 1e-10


def test_composition_remainders_decay(mid_model, fam):
    res = compose_symbols(mid_model, sym(mid_model, "poly_decay(-0.5)"), sym(mid_model, "xdep(sin)"), 4, fam)
    assert res.passed
    assert all(abs(d - 1.0) <= 0.3 for d in res.decrements())


def test_linear_multiplier_expansion_terminates(mid_model, fam):
    # lambda is affine in the index, so two terms reproduce the composition
    res = compose_symbols(mid_model, sym(mid_model, "lambda"), sym(mid_model, "xdep(sin)"), 3, fam)
    assert res.exponents[1] == -np.inf and res.exponents[2] == -np.inf


def test_adjoint_remainders_decay(mid_model, fam):
    res = adjoint_symbol(mid_model, sym(mid_model, "xdep(sin)*poly_decay(1)"), 4, fam)
    assert res.passed
    assert all(abs(d - 1.0) <= 0.3 for d in res.decrements())


def test_adjoint_of_multiplication_is_conjugate(periodic):
    a = sym(periodic, "xdep(exp)")
    t = adjoint_exact(periodic, a)
    assert t.flavor == "L*"
    # the lowest index leaves the truncated span after multiplication by e^{-2 pi i x}
    assert np.max(np.abs(t.table[:, 1:] - np.exp(-2j * np.pi * periodic.x)[:, None])) < 1e-10


def test_lstar_to_l_is_identity_when_self_adjoint(periodic):
    t = Symbol(sym(periodic, "xdep(sin)*poly_decay(1)").table, -1.0, flavor="L*")
    back = lstar_to_l_symbol(periodic, t)
    assert back.flavor == "L" and np.max(np.abs(back.table - t.table)) < 1e-10


def test_amplitude_without_y_dependence_is_exact(mid_model, fam):
    x = mid_model.x
    decay = np.broadcast_to(mid_model.weights[None, :] ** -1.0, (x.size, mid_model.size)) + 0j
    amp = SeparableAmplitude((decay * np.cos(2 * np.pi * x)[:, None],), (np.ones_like(x) + 0j,), -1.0)
    res = amplitude_to_symbol(mid_model, amp, 1, fam)
    assert np.max(np.abs(res.exact.filled() - res.truncated.filled())) < 1e-8


def test_amplitude_reduction_decays(mid_model, fam):
    x = mid_model.x
    decay = np.broadcast_to(mid_model.weights[None, :] ** -1.0, (x.size, mid_model.size)) + 0j
    amp = SeparableAmplitude((decay,), (np.sin(2 * np.pi * x) + 0j,), -1.0)
    res = amplitude_to_symbol(mid_model, amp, 4, fam)
    assert res.passed and res.monotone()
