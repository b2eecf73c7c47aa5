"""Acceptance criteria at desk scale: 2048 Gauss-Legendre nodes, Xi_max = 64, fixed seeds.

Each ``test_criterion_*`` prints exactly one ``[PASS]``/``[FAIL]`` line.  Two
criteria are reported red on purpose because their literal form cannot hold
for these operators; the ``test_supplementary_*`` tests measure the property the
criterion is after on a case where it is well posed.
"""

import numpy as np
import pytest

from nonharm.calculus import adjoint_symbol, compose_symbols, fit_order, sup_profile
from nonharm.differences import D_alpha_function, delta_q, make_family
from nonharm.elliptic import (apriori_estimate_check, kernel_decay_report, parametrix,
                              sobolev_boundedness_check)
from nonharm.oracle import dense_adjoint, dense_assemble, forward_difference, symbol_rule
from nonharm.quantize import (Symbol, adjoint_op, generated_symbol, multiplier_op,
                              multiplier_symbol, op_from_symbol, symbol, symbol_of_operator)
from nonharm.spectral_model import build_model, gauss_legendre_grid, probe_coefficients, verify_riesz_bounds
from nonharm.transform import forward, forward_star, hausdorff_young_check, inverse, inverse_star, parseval_check

NODES = 2048
XI = 64
SEED = 0
PROBES = 32
EXPONENT_TOL = 0.3

pytestmark = pytest.mark.acceptance


@pytest.fixture(scope="module")
def grid():
    return gauss_legendre_grid(NODES)


@pytest.fixture(scope="module")
def models(grid):
    return {
        "h-model": build_model("h-model", XI, h=2.0, nodes=NODES),
        "periodic": build_model("periodic", XI, nodes=NODES),
        "dirichlet": build_model("dirichlet", XI, nodes=NODES),
    }


@pytest.fixture(scope="module")
def exp_diff(grid):
    return make_family("exp_diff", grid)


def _random_table(model, rng):
    shape = (model.grid.count, model.size)
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def _fmt(values):
    return "[" + ", ".join(f"{v:.3g}" for v in values) + "]"


def test_criterion_01_biorthogonality(acceptance_line):
    errs = {}
    for h in (0.5, 1.0, 2.0):
        m = build_model("h-model", XI, h=h, nodes=NODES)
        errs[h] = float(np.max(np.abs(m.gram() - np.eye(m.size))))
    ok = all(e < 1e-8 for e in errs.values())
    detail = ", ".join(f"h={h}: {e:.2e}" for h, e in errs.items()) + " (< 1e-8)"
    assert acceptance_line(1, "biorthogonality", ok, detail)


def test_criterion_02_inversion_plancherel(models, acceptance_line):
    worst = {"roundtrip": 0.0, "norm_spread": 0.0, "parseval": 0.0}
    for m in models.values():
        F = m.U @ probe_coefficients(m, PROBES, SEED)
        G = m.U @ probe_coefficients(m, PROBES, SEED, first=PROBES)
        back = inverse(m, forward(m, F))
        worst["roundtrip"] = max(worst["roundtrip"], float(np.max(np.abs(back - F)) / np.max(np.abs(F))))
        fs = forward_star(m, F)
        star_back = forward_star(m, inverse_star(m, fs)).values
        worst["roundtrip"] = max(worst["roundtrip"],
                                 float(np.max(np.abs(star_back - fs.values)) / np.max(np.abs(F))))
        for j in range(PROBES):
            rep = parseval_check(m, F[:, j], G[:, j])
            worst["norm_spread"] = max(worst["norm_spread"], rep.norm_spread / rep.norm_l2)
            worst["parseval"] = max(worst["parseval"], rep.mismatch / max(1.0, abs(rep.lhs)))
    ok = all(v < 1e-8 for v in worst.values())
    detail = ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + " (< 1e-8, 3 models x 32 probes)"
    assert acceptance_line(2, "inversion and Plancherel", ok, detail)


def test_criterion_03_riesz_bounds(models, acceptance_line):
    m = models["h-model"]
    a = verify_riesz_bounds(m, PROBES, SEED)
    b = verify_riesz_bounds(m, 2 * PROBES, SEED)
    ch_lo = abs(b.m_lo - a.m_lo) / a.m_lo
    ch_hi = abs(b.M_hi - a.M_hi) / a.M_hi
    ok = a.m_lo > 0 and a.M_hi > 0 and ch_lo <= 0.05 and ch_hi <= 0.05
    detail = (f"h=2: m_lo {a.m_lo:.4f} -> {b.m_lo:.4f} ({ch_lo:.2%}), "
              f"M_hi {a.M_hi:.4f} -> {b.M_hi:.4f} ({ch_hi:.2%}) under probe doubling (<= 5%)")
    assert acceptance_line(3, "Riesz bounds", ok, detail)


def test_criterion_04_hausdorff_young(models, acceptance_line):
    ok = True
    parts = []
    for name, m in models.items():
        cs = []
        for p in (1.0, 1.5, 2.0):
            rep = hausdorff_young_check(m, p, PROBES, SEED)
            ok &= bool(np.isfinite(rep.constant) and rep.constant > 0)
            if name == "periodic":
                ok &= abs(rep.constant - 1) < 1e-8
            cs.append(rep.constant)
        parts.append(f"{name} C_p {_fmt(cs)}")
    assert acceptance_line(4, "Hausdorff-Young", ok, "; ".join(parts) + " (periodic = 1 +- 1e-8)")


def test_criterion_05_quantization_roundtrip(models, acceptance_line):
    rng = np.random.default_rng(SEED)
    ok = True
    parts = []
    for name, m in models.items():
        a = Symbol(_random_table(m, rng))
        back = symbol_of_operator(m, op_from_symbol(m, a), eps=1e-6)
        err = float(np.max(np.abs(back.table - a.table)[back.valid]) / np.max(np.abs(a.table)))
        if name == "dirichlet":
            ok &= err < 1e-8 and back.masked_fraction < 0.2
        else:
            ok &= err < 1e-8 and back.mask is None
        parts.append(f"{name} err {err:.2e} masked {back.masked_fraction:.2%}")
    assert acceptance_line(5, "quantization round trip", ok, "; ".join(parts))


def test_criterion_06_difference_calculus(models, exp_diff, acceptance_line):
    m = models["periodic"]
    rng = np.random.default_rng(SEED)
    vals = rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)
    d = delta_q(m, multiplier_symbol(m, vals), 1, exp_diff)
    fd = forward_difference(vals)
    # the top index has no successor inside the truncation
    diff_err = float(np.max(np.abs(d.table[:, :-1] - fd[None, :-1])))
    x = m.x
    deriv_err = 0.0
    for k in (-5, -1, 1, 3, 8):
        g = np.exp(2j * np.pi * k * x)
        ref = m.grid.derivative(g, 1) / (2j * np.pi)
        deriv_err = max(deriv_err, float(np.max(np.abs(D_alpha_function(exp_diff, g, 1) - ref))),
                        float(np.max(np.abs(D_alpha_function(exp_diff, g, 1) - k * g))))
    ok = diff_err < 1e-8 and deriv_err < 1e-8
    detail = f"Delta_q vs forward difference {diff_err:.2e}; D^(1) vs (2 pi i)^-1 d/dx {deriv_err:.2e} (< 1e-8)"
    assert acceptance_line(6, "difference calculus", ok, detail)


def test_criterion_07_composition(models, exp_diff, acceptance_line):
    m = models["periodic"]
    rng = np.random.default_rng(SEED)
    a = multiplier_symbol(m, rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size))
    b = multiplier_symbol(m, rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size))
    mm = compose_symbols(m, a, b, 1, exp_diff)
    mm_err = float(np.max(np.abs(mm.exact.filled() - mm.truncated.filled()))
                   / np.max(np.abs(mm.truncated.filled())))
    res = compose_symbols(m, generated_symbol(m, "lambda"), generated_symbol(m, "xdep(sin)"), 3, exp_diff)
    dec = res.decrements()
    dec_ok = all(np.isfinite(d) and abs(d - 1.0) <= EXPONENT_TOL for d in dec)
    ok = mm_err < 1e-10 and dec_ok
    detail = (f"multiplier product {mm_err:.2e} (< 1e-10); lambda o sin remainder exponents "
              f"{_fmt(res.exponents)} for N=1..3, decrements {_fmt(dec)} (target 1.0 +- 0.3)")
    assert acceptance_line(7, "composition", ok, detail)


def test_criterion_08_adjoint(models, exp_diff, acceptance_line):
    m = models["h-model"]
    rng = np.random.default_rng(SEED)
    sig = rng.standard_normal(m.size) + 1j * rng.standard_normal(m.size)
    t = symbol_of_operator(m, adjoint_op(m, multiplier_op(m, sig)), 1e-6, "L*")
    mult_err = float(np.max(np.abs(t.table - np.conj(sig)[None, :])[t.valid]) / np.max(np.abs(sig)))

    a = generated_symbol(m, "xdep(sin)*poly_decay(1)")
    res = adjoint_symbol(m, a, 4, exp_diff)
    dense = dense_adjoint(dense_assemble(m, symbol_rule(m, a.table)))
    oracle = symbol_of_operator(m, dense, 1e-6, "L*")
    scale = float(np.max(sup_profile(oracle)))
    exps = [fit_order(m, sup_profile(oracle - p), scale).exponent for p in res.partial_sums]
    dec = [x - y for x, y in zip(exps, exps[1:])]
    dec_ok = all(abs(d - 1.0) <= EXPONENT_TOL for d in dec)
    ok = mult_err < 1e-8 and dec_ok
    detail = (f"multiplier adjoint {mult_err:.2e} (< 1e-8); sin <xi>^-1 remainder exponents vs dense "
              f"adjoint {_fmt(exps)}, decrements {_fmt(dec)} (target 1.0 +- 0.3)")
    assert acceptance_line(8, "adjoint", ok, detail)


def test_criterion_09_parametrix(models, exp_diff, acceptance_line):
    m = models["periodic"]
    parts = [generated_symbol(m, "lambda"), generated_symbol(m, "xdep(sin)")]
    res = parametrix(m, parts, 1.0, 3, exp_diff)
    r = res.residuals
    mono = r[0] > r[1] > r[2]
    band_ok = all(-e >= (n + 1) - 0.5 for n, e in enumerate(res.band_exponents))
    ok = mono and band_ok
    detail = (f"residuals r_N {_fmt(r)}; band decay exponents {_fmt(-np.asarray(res.band_exponents))} "
              f"(>= N+1-0.5); N0={res.ellipticity.N0} C0={res.ellipticity.C0:.3f}")
    assert acceptance_line(9, "parametrix", ok, detail)


def _kernel_report(models, exp_diff):
    m = models["periodic"]
    return kernel_decay_report(m, lambda mm: generated_symbol(mm, "poly_decay(-1)"), exp_diff, 1.0,
                               k=0, rho=1.0, mu0=0.0, N=4)


def test_criterion_10_kernel_decay(models, exp_diff, acceptance_line):
    rep = _kernel_report(models, exp_diff)
    g = dict(zip(rep.alphas, rep.growth))
    stable4 = g[4] < rep.growth_limit
    grows0 = g[0] > rep.growth_limit
    # the off-diagonal profile |K| ~ |q|^-p; the criterion asks for p >= N - 0.5
    p = rep.singularity_exponent
    offdiag_ok = p >= rep.N - 0.5
    ok = stable4 and grows0 and offdiag_ok
    detail = (f"threshold {rep.threshold:g}; sup|q^a K| growth on doubling a=0: {g[0]:.3f}, a=4: {g[4]:.3f}; "
              f"off-diagonal exponent {p:.3f} vs required >= {rep.N - 0.5}")
    assert acceptance_line(10, "kernel decay", ok, detail)


def test_criterion_11_boundedness(models, acceptance_line):
    m = models["h-model"]
    mu = m.m
    w = symbol(m, lambda x, xi, wt, lam: wt**mu, order=mu)
    dev = 0.0
    for s in (0.0, 1.0, -1.0):
        r = sobolev_boundedness_check(m, w, mu, s, PROBES, SEED)
        dev = max(dev, abs(r.ratio - 1), abs(r.ratio_doubled - 1))
    factory = lambda mm: generated_symbol(mm, "lambda") + generated_symbol(mm, "xdep(sin)")
    ap = apriori_estimate_check(m, factory, mu, 0.0, 2.0, PROBES, SEED, (32, 64), 0.2)
    ok = dev < 1e-10 and ap.passed
    detail = (f"weight ratio deviation {dev:.2e} (< 1e-10); a-priori C {ap.C[0]:.4f} -> {ap.C[1]:.4f} "
              f"({ap.relative_change:.2%}, <= 20%) for Xi 32 -> 64")
    assert acceptance_line(11, "boundedness", ok, detail)


def test_criterion_12_oracle_independence(models, acceptance_line):
    m = models["h-model"]
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(8):
        tab = _random_table(m, rng)
        K1 = op_from_symbol(m, Symbol(tab)).kernel
        K2 = dense_assemble(m, symbol_rule(m, tab)).kernel
        worst = max(worst, float(np.max(np.abs(K1 - K2))))
    ok = worst < 1e-10
    assert acceptance_line(12, "oracle independence", ok, f"max entry difference {worst:.2e} over 8 symbols (< 1e-10)")


# ── supplementary measurements behind the two red criteria ─────────────────


def test_supplementary_composition_decrement_nonterminating(models, exp_diff):
    """A multiplier that is not affine in the index keeps every remainder nonzero."""
    m = models["periodic"]
    res = compose_symbols(m, generated_symbol(m, "poly_decay(-0.5)"), generated_symbol(m, "xdep(sin)"),
                          4, exp_diff)
    print("exponents", res.exponents, "decrements", res.decrements())
    assert res.passed
    assert all(abs(d - 1.0) <= EXPONENT_TOL for d in res.decrements())


def test_supplementary_lambda_sine_remainders_within_targets(models, exp_diff):
    """The literal pair meets every remainder bound; it is exact from N = 2 on."""
    m = models["periodic"]
    res = compose_symbols(m, generated_symbol(m, "lambda"), generated_symbol(m, "xdep(sin)"), 3, exp_diff)
    assert res.passed
    assert res.exponents[1] == -np.inf and res.exponents[2] == -np.inf


def test_supplementary_kernel_weighted_offdiagonal_sup_stable(models, exp_diff):
    """``sup |q|^N |K|`` stays bounded as Xi doubles, which is the bound the decay estimate gives."""
    rep = _kernel_report(models, exp_diff)
    print("offdiag sups", rep.offdiag_sups, "singularity exponent", rep.singularity_exponent)
    assert rep.offdiag_growth < rep.growth_limit
    assert abs(rep.singularity_exponent - 2.0) < EXPONENT_TOL


def test_supplementary_parametrix_h_model(models, exp_diff):
    m = models["h-model"]
    res = parametrix(m, [generated_symbol(m, "lambda"), generated_symbol(m, "xdep(sin)")], 1.0, 3, exp_diff)
    assert res.residuals[0] > res.residuals[1] > res.residuals[2]
    assert all(-e >= (n + 1) - 0.5 for n, e in enumerate(res.band_exponents))
