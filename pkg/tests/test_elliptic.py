import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonharm.calculus import CalculusError
from nonharm.differences import make_family
from nonharm.elliptic import (apriori_estimate_check, check_elliptic, kernel_decay_report,
                              l2_boundedness_check, parametrix, segment_min_abs, singular_support_demo,
                              smooth_taper, sobolev_boundedness_check, sobolev_embedding_check)
from nonharm.quantize import generated_symbol, symbol
from nonharm.spectral_model import build_model


@pytest.fixture(scope="module", params=["periodic", "h-model"])
def mid_model(request):
    return build_model(request.param, 32, h=2.0, nodes=256)


@pytest.fixture(scope="module")
def fam(mid_model):
    return make_family("exp_diff", mid_model.grid)


def lam_plus_sin(model):
    return generated_symbol(model, "lambda") + generated_symbol(model, "xdep(sin)")


def test_elliptic_principal_part(mid_model):
    rep = check_elliptic(mid_model, lam_plus_sin(mid_model), 1.0)
    assert rep.passed and rep.C0 > 0.1


def test_sine_is_not_elliptic(mid_model):
    # sin(2 pi x) vanishes at x = 1/2, which falls between Gauss-Legendre nodes
    assert not check_elliptic(mid_model, generated_symbol(mid_model, "xdep(sin)"), 0.0).passed


def test_segment_min_catches_sign_change():
    col = np.array([[1.0], [0.5], [-0.5], [-1.0]])
    assert segment_min_abs(col)[0] < 1e-12


def test_parametrix_of_multiplier_is_exact_inverse(mid_model, fam):
    w = symbol(mid_model, lambda x, xi, wt, lam: wt**2, order=2.0)
    res = parametrix(mid_model, [w], 2.0, 2, fam)
    assert max(res.residuals) < 1e-10


def test_parametrix_residuals_shrink(mid_model, fam):
    lam = generated_symbol(mid_model, "lambda")
    s = generated_symbol(mid_model, "xdep(sin)")
    res = parametrix(mid_model, [lam, s], 1.0, 3, fam)
    assert res.monotone() and res.strictly_decreasing()
    for n, e in enumerate(res.band_exponents):
        assert -e >= (n + 1) - 0.5
    for n, o in enumerate(res.B_orders):
        assert abs(o - (-1 - n)) < 0.3


def test_parametrix_refuses_rho_equal_delta(mid_model, fam):
    with pytest.raises(CalculusError):
        parametrix(mid_model, [generated_symbol(mid_model, "lambda")], 1.0, 2, fam, 0.5, 0.5)


def test_l2_bound_holds(mid_model):
    for expr in ("one", "xdep(sin)", "gauss_decay(8)"):
        rep = l2_boundedness_check(mid_model, generated_symbol(mid_model, expr), 1)
        assert rep.passed, expr
    # Op(1) is the projector onto the truncated span: orthogonal only when self-adjoint
    norm = l2_boundedness_check(mid_model, generated_symbol(mid_model, "one"), 1).norm
    if mid_model.self_adjoint:
        assert abs(norm - 1) < 1e-8
    else:
        assert norm > 1


@pytest.mark.parametrize("s", [0.0, 1.0, -0.5])
def test_weight_shift_ratio_is_one(mid_model, s):
    mu = mid_model.m
    w = symbol(mid_model, lambda x, xi, wt, lam: wt**mu, order=mu)
    rep = sobolev_boundedness_check(mid_model, w, mu, s, 8, 0)
    assert abs(rep.ratio - 1) < 1e-10 and abs(rep.ratio_doubled - 1) < 1e-10


def test_apriori_constant_stable(mid_model):
    rep = apriori_estimate_check(mid_model, lam_plus_sin, 1.0, 0.0, 2.0, 8, 0, (16, 32))
    assert rep.passed and rep.relative_change < 0.2


def test_embedding_ratio_stable(mid_model):
    rep = sobolev_embedding_check(mid_model, 1, 1.0, 8, 0)
    assert np.isfinite(rep.ratio) and rep.stable(0.05)


def test_kernel_decay_above_threshold(periodic):
    fam = make_family("exp_diff", periodic.grid)
    model = build_model("periodic", 32, nodes=256)
    rep = kernel_decay_report(model, lambda m: generated_symbol(m, "poly_decay(-1)"), fam, 1.0)
    assert rep.threshold == 3.0
    assert rep.growth[0] > 3.0
    assert rep.stable(4)
    assert abs(rep.singularity_exponent - 2) < 0.3


def test_smooth_taper_profile():
    t = np.linspace(0, 2, 201)
    chi = smooth_taper(t)
    assert np.all(chi[t <= 0.5] == 1) and np.all(chi[t >= 1] == 0)
    assert np.all(np.diff(chi) <= 0)


def test_singular_support_is_preserved(periodic):
    model = build_model("periodic", 32, nodes=256)
    fam = make_family("exp_diff", model.grid)
    a = lam_plus_sin(model)
    B = parametrix(model, [generated_symbol(model, "lambda"), generated_symbol(model, "xdep(sin)")],
                   1.0, 2, fam).sigma_B
    rep = singular_support_demo(model, a, B)
    for name in ("w", "Aw", "BAw"):
        assert abs(rep.peaks[name] - 0.5) <= 2 * rep.cell, name
    assert rep.indicators["smooth"].max() < 1e-3 * rep.indicators["w"].max()


@settings(max_examples=15, deadline=None)
@given(re=st.floats(-4, 4), im=st.floats(-4, 4))
def test_boundedness_ratio_scales_with_symbol(mid_model, re, im):
    c = complex(re, im)
    if abs(c) < 1e-3:
        return
    a = generated_symbol(mid_model, "xdep(sin)*poly_decay(1)")
    base = sobolev_boundedness_check(mid_model, a, -1.0, 0.5, 4, 0).ratio
    scaled = sobolev_boundedness_check(mid_model, a * c, -1.0, 0.5, 4, 0).ratio
    assert abs(scaled - abs(c) * base) < 1e-10 * abs(c) * base
