import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonharm.oracle import dense_adjoint, dense_assemble, dense_multiplication, symbol_rule
from nonharm.quantize import (QuantizeError, Symbol, admissibility_report, adjoint_op,
                              generated_symbol, identity_op, multiplication_op, multiplier_op,
                              multiplier_symbol, op_from_amplitude, op_from_symbol,
                              quantized_apply, read_symbol_csv, symbol, symbol_of_operator,
                              write_symbol_csv)
from nonharm.spectral_model import probe_coefficients


def _random_symbol(model, rng, flavor="L"):
    shape = (model.grid.count, model.size)
    return Symbol(rng.standard_normal(shape) + 1j * rng.standard_normal(shape), flavor=flavor)


def test_roundtrip_wz(wz_model, rng):
    a = _random_symbol(wz_model, rng)
    back = symbol_of_operator(wz_model, op_from_symbol(wz_model, a))
    assert back.mask is None
    assert np.max(np.abs(back.table - a.table)) / np.max(np.abs(a.table)) < 1e-8


def test_roundtrip_dirichlet_on_unmasked(dirichlet, rng):
    a = _random_symbol(dirichlet, rng)
    back = symbol_of_operator(dirichlet, op_from_symbol(dirichlet, a))
    assert back.masked_fraction < 0.2
    err = np.abs(back.table - a.table)[back.valid]
    assert np.max(err) / np.max(np.abs(a.table)) < 1e-8


def test_masked_entries_sit_near_zeros_of_eigenfunctions(dirichlet):
    sig = symbol_of_operator(dirichlet, identity_op(dirichlet.grid), eps=1e-2)
    assert sig.mask is not None
    rel = np.abs(dirichlet.U) / np.abs(dirichlet.U).max(axis=0)
    assert np.all(rel[sig.mask] <= 1e-2)


def test_lstar_roundtrip(h2, rng):
    a = _random_symbol(h2, rng, "L*")
    back = symbol_of_operator(h2, op_from_symbol(h2, a), flavor="L*")
    assert np.max(np.abs(back.table - a.table)) / np.max(np.abs(a.table)) < 1e-8


def test_identity_has_unit_symbol(wz_model):
    sig = symbol_of_operator(wz_model, identity_op(wz_model.grid))
    assert np.max(np.abs(sig.table - 1)) < 1e-8


def test_multiplication_symbol_is_the_function(wz_model):
    g = np.cos(2 * np.pi * wz_model.x) + 2
    sig = symbol_of_operator(wz_model, multiplication_op(wz_model.grid, g))
    assert np.max(np.abs(sig.table - g[:, None])) < 1e-10


def test_multiplier_symbol_is_constant_in_x(any_model, rng):
    vals = rng.standard_normal(any_model.size)
    sig = symbol_of_operator(any_model, multiplier_op(any_model, vals))
    err = np.abs(sig.table - vals[None, :])[sig.valid]
    assert np.max(err) < 1e-8 * np.max(np.abs(vals))


def test_multiplier_adjoint_is_conjugate_lstar_multiplier(any_model, rng):
    vals = rng.standard_normal(any_model.size) + 1j * rng.standard_normal(any_model.size)
    A = multiplier_op(any_model, vals)
    t = symbol_of_operator(any_model, adjoint_op(any_model, A), flavor="L*")
    err = np.abs(t.table - np.conj(vals)[None, :])[t.valid]
    assert np.max(err) < 1e-8 * np.max(np.abs(vals))


def test_adjoint_matches_dense_oracle(h2, rng):
    A = op_from_symbol(h2, _random_symbol(h2, rng))
    assert np.max(np.abs(adjoint_op(h2, A).kernel - dense_adjoint(A).kernel)) < 1e-10


def test_quantize_matches_oracle(any_model, rng):
    a = _random_symbol(any_model, rng)
    K1 = op_from_symbol(any_model, a).kernel
    K2 = dense_assemble(any_model, symbol_rule(any_model, a.table)).kernel
    assert np.max(np.abs(K1 - K2)) / np.max(np.abs(K1)) < 1e-10


def test_quantized_apply_agrees_with_kernel(h2, rng):
    a = _random_symbol(h2, rng)
    f = h2.U @ probe_coefficients(h2, 1, 0)[:, 0]
    direct = quantized_apply(h2, a, f)
    assert np.max(np.abs(direct - op_from_symbol(h2, a).apply(f))) < 1e-9 * np.max(np.abs(direct))


def test_multiplication_matches_dense(h2):
    g = np.sin(2 * np.pi * h2.x)
    assert np.max(np.abs(multiplication_op(h2.grid, g).kernel - dense_multiplication(h2, g).kernel)) < 1e-12


def test_amplitude_independent_of_y_is_symbol(h2, rng):
    a = _random_symbol(h2, rng)
    A = op_from_amplitude(h2, lambda k: np.broadcast_to(a.table[:, k:k + 1], (h2.grid.count,) * 2))
    assert np.max(np.abs(A.kernel - op_from_symbol(h2, a).kernel)) < 1e-10 * np.max(np.abs(A.kernel))


def test_dense_amplitude_shape_checked(h2):
    with pytest.raises(QuantizeError):
        op_from_amplitude(h2, np.zeros((3, 3, 3)))


def test_admissibility_wz_and_dirichlet(h2, dirichlet):
    rep = admissibility_report(h2, multiplication_op(h2.grid, 1 + h2.x))
    assert rep.admissible and rep.masked_fraction == 0 and rep.reproduction_error < 1e-8
    rep = admissibility_report(dirichlet, multiplication_op(dirichlet.grid, 1 + dirichlet.x))
    assert rep.admissible


def test_symbol_arithmetic(h2):
    a = generated_symbol(h2, "lambda")
    b = generated_symbol(h2, "xdep(sin)")
    assert (a + b).order == a.order
    assert (a * b).order == a.order + b.order
    assert np.allclose((a - a).table, 0)
    assert np.allclose((a * 2.0).table, 2 * a.table)
    assert np.allclose(a.conj().table, np.conj(a.table))


def test_mixed_flavors_raise(h2, rng):
    with pytest.raises(QuantizeError):
        _random_symbol(h2, rng) + _random_symbol(h2, rng, "L*")


def test_symbol_validation(h2):
    with pytest.raises(QuantizeError):
        Symbol(np.ones(3))
    with pytest.raises(QuantizeError):
        Symbol(np.ones((2, 2)), mask=np.ones((3, 3), bool))
    with pytest.raises(QuantizeError):
        Symbol(np.ones((2, 2)), flavor="R")
    with pytest.raises(QuantizeError):
        op_from_symbol(h2, Symbol(np.ones((2, 2))))
    with pytest.raises(QuantizeError):
        multiplier_symbol(h2, np.ones(3))


@pytest.mark.parametrize("expr", ["sqrt(lambda)", "xdep(tan)", "", "gauss_decay()"])
def test_generated_symbol_rejects(h2, expr):
    with pytest.raises((QuantizeError, ValueError)):
        generated_symbol(h2, expr)


def test_generated_symbol_orders(h2):
    assert generated_symbol(h2, "lambda").order == h2.m
    assert generated_symbol(h2, "poly_decay(2)").order == -2
    assert generated_symbol(h2, "xdep(sin)*poly_decay(1) + one").order == 0
    w = symbol(h2, lambda x, xi, wt, lam: wt**-2, order=-2)
    assert np.allclose(generated_symbol(h2, "poly_decay(2)").table, w.table)


def test_symbol_csv_roundtrip(tmp_path, h2, rng):
    a = _random_symbol(h2, rng)
    mask = np.zeros(a.shape, bool)
    mask[3, 4] = True
    a = a.with_table(a.table, mask=mask)
    p = tmp_path / "sym.csv"
    write_symbol_csv(h2, a, p)
    b = read_symbol_csv(h2, p)
    assert np.array_equal(b.mask, mask)
    assert np.array_equal(b.table[~mask], a.table[~mask])


def test_bad_symbol_csv(tmp_path, h2):
    p = tmp_path / "bad.csv"
    p.write_text("x_index,xi,re,im\n0,999,1,0\n")
    with pytest.raises(QuantizeError):
        read_symbol_csv(h2, p)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), c=st.floats(-5, 5))
def test_quantization_is_linear(h2, seed, c):
    r = np.random.default_rng(seed)
    a, b = _random_symbol(h2, r), _random_symbol(h2, r)
    lhs = op_from_symbol(h2, a * c + b).kernel
    rhs = c * op_from_symbol(h2, a).kernel + op_from_symbol(h2, b).kernel
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**31 - 1))
def test_adjoint_is_an_involution(h2, seed):
    A = op_from_symbol(h2, _random_symbol(h2, np.random.default_rng(seed)))
    assert np.array_equal(adjoint_op(h2, adjoint_op(h2, A)).kernel, A.kernel)
