"""Symbols, quantized operators, kernels, amplitudes and Fourier multipliers.

An operator is stored through its kernel samples ``K[i, j] = K(x_i, y_j)`` and acts
by quadrature, ``(A f)(x_i) = sum_j w_j K[i, j] f(y_j)``.  With this convention the
weighted adjoint is the plain conjugate transpose of the kernel.
"""

from __future__ import annotations

import csv
import logging
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .spectral_model import Grid, SpectralModel

log = logging.getLogger(__name__)

L_FLAVOR, LSTAR_FLAVOR = "L", "L*"


class QuantizeError(ValueError):
    """Shape mismatch or malformed symbol input."""


# ── symbols ─────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class Symbol:
    """Table ``a[x_i, xi]`` with order metadata.

    Parameters
    ----------
    table : ndarray, shape (N_x, n)
    order : float
        Claimed order ``m``.
    rho, delta : float
        Type parameters of the claimed class.
    mask : ndarray of bool, optional
        ``True`` where extraction was undefined (``u_xi`` too close to zero).
    flavor : {"L", "L*"}
        Whether the table is read against ``u_xi`` (``L``) or ``v_xi`` (``L*``).
    """

    table: np.ndarray
    order: float = 0.0
    rho: float = 1.0
    delta: float = 0.0
    mask: np.ndarray | None = None
    flavor: str = L_FLAVOR

    def __post_init__(self):
        t = np.asarray(self.table, dtype=complex)
        if t.ndim != 2:
            raise QuantizeError("symbol table must be 2-D (grid x index set)")
        object.__setattr__(self, "table", t)
        if self.mask is not None:
            mk = np.asarray(self.mask, dtype=bool)
            if mk.shape != t.shape:
                raise QuantizeError("mask shape differs from table shape")
            object.__setattr__(self, "mask", mk if mk.any() else None)
        if self.flavor not in (L_FLAVOR, LSTAR_FLAVOR):
            raise QuantizeError(f"unknown flavor {self.flavor!r}")

    @property
    def shape(self):
        return self.table.shape

    @property
    def masked_fraction(self) -> float:
        return 0.0 if self.mask is None else float(self.mask.mean())

    @property
    def is_total(self) -> bool:
        return self.mask is None

    @property
    def valid(self) -> np.ndarray:
        return np.ones(self.shape, bool) if self.mask is None else ~self.mask

    def filled(self, value: complex = 0.0) -> np.ndarray:
        if self.mask is None:
            return self.table
        t = self.table.copy()
        t[self.mask] = value
        return t

    def with_table(self, table, **kw) -> "Symbol":
        kw.setdefault("mask", self.mask)
        return replace(self, table=table, **kw)

    def __add__(self, other: "Symbol") -> "Symbol":
        return combine(self, other, 1.0)

    def __sub__(self, other: "Symbol") -> "Symbol":
        return combine(self, other, -1.0)

    def __mul__(self, other):
        if isinstance(other, Symbol):
            mask = _union(self.mask, other.mask)
            return Symbol(self.table * other.table, self.order + other.order,
                          min(self.rho, other.rho), max(self.delta, other.delta), mask, self.flavor)
        return self.with_table(self.table * other)

    __rmul__ = __mul__

    def conj(self) -> "Symbol":
        return self.with_table(np.conj(self.table))


def _union(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return a | b


def combine(a: Symbol, b: Symbol, sign: float = 1.0) -> Symbol:
    if a.shape != b.shape:
        raise QuantizeError("symbol shapes differ")
    if a.flavor != b.flavor:
        raise QuantizeError("cannot combine L- and L*-symbols")
    return Symbol(a.table + sign * b.table, max(a.order, b.order), min(a.rho, b.rho),
                  max(a.delta, b.delta), _union(a.mask, b.mask), a.flavor)


def symbol(model: SpectralModel, func: Callable, order: float = 0.0, rho: float = 1.0,
           delta: float = 0.0, flavor: str = L_FLAVOR) -> Symbol:
    """Build a symbol from ``func(x, xi, weight, lam)`` broadcast over grid x index set."""
    x = model.x[:, None]
    xi = model.indices[None, :]
    tab = func(x, xi, model.weights[None, :], model.eigenvalues[None, :])
    tab = np.broadcast_to(np.asarray(tab, dtype=complex), (model.grid.count, model.size)).copy()
    return Symbol(tab, order, rho, delta, None, flavor)


def multiplier_symbol(model: SpectralModel, values, order: float = 0.0, **kw) -> Symbol:
    vals = np.asarray(values, dtype=complex)
    if vals.shape != (model.size,):
        raise QuantizeError("multiplier values must have one entry per index")
    return Symbol(np.tile(vals, (model.grid.count, 1)), order, **kw)


# ── operators ───────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense kernel samples acting by quadrature on the grid."""

    kernel: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        k = np.asarray(self.kernel, dtype=complex)
        if k.ndim != 2 or k.shape[0] != k.shape[1] or k.shape[0] != self.weights.size:
            raise QuantizeError("kernel must be square and match the grid")
        object.__setattr__(self, "kernel", k)

    def apply(self, f) -> np.ndarray:
        f = np.asarray(f)
        w = self.weights if f.ndim == 1 else self.weights[:, None]
        return self.kernel @ (w * f)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.kernel @ (self.weights[:, None] * other.kernel), self.weights)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.kernel + other.kernel, self.weights)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.kernel - other.kernel, self.weights)

    def scaled(self, c) -> "OperatorMatrix":
        return OperatorMatrix(self.kernel * c, self.weights)

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(self.kernel.conj().T, self.weights)

    def norm(self, tol: float = 1e-10) -> float:
        """L2 operator norm: largest singular value of ``W^{1/2} K W^{1/2}``."""
        s = np.sqrt(self.weights)
        M = s[:, None] * self.kernel * s[None, :]
        if M.shape[0] <= 512:
            return float(np.linalg.norm(M, 2))
        op = LinearOperator(M.shape, matvec=lambda v: M @ v, rmatvec=lambda v: M.conj().T @ v,
                            dtype=complex)
        v0 = np.ones(M.shape[0], dtype=complex) / np.sqrt(M.shape[0])
        return float(svds(op, k=1, tol=tol, v0=v0, return_singular_vectors=False)[0])


def identity_op(grid: Grid) -> OperatorMatrix:
    return OperatorMatrix(np.diag(1.0 / grid.weights).astype(complex), grid.weights)


def multiplication_op(grid: Grid, g) -> OperatorMatrix:
    """Multiplication by ``g``: kernel ``diag(g / w)`` so that quadrature returns ``g f``."""
    return OperatorMatrix(np.diag(np.asarray(g, dtype=complex) / grid.weights), grid.weights)


def _synth_analysis(model: SpectralModel, flavor: str):
    return (model.U, model.V) if flavor == L_FLAVOR else (model.V, model.U)


def kernel_of_symbol(model: SpectralModel, a: Symbol) -> np.ndarray:
    """``K(x, y) = sum_xi u_xi(x) a(x, xi) conj(v_xi(y))`` (``u``/``v`` swapped for L*)."""
    _check_shape(model, a)
    synth, anal = _synth_analysis(model, a.flavor)
    if a.mask is not None:
        log.info("kernel synthesis: %d masked entries treated as 0", int(a.mask.sum()))
    return (a.filled() * synth) @ anal.conj().T


def op_from_symbol(model: SpectralModel, a: Symbol) -> OperatorMatrix:
    """Quantization ``A f = sum_xi f^(xi) a(., xi) u_xi``."""
    return OperatorMatrix(kernel_of_symbol(model, a), model.w)


def quantized_apply(model: SpectralModel, a: Symbol, f) -> np.ndarray:
    """Apply the quantization through coefficients, without forming the kernel."""
    _check_shape(model, a)
    synth, anal = _synth_analysis(model, a.flavor)
    coeff = anal.conj().T @ (model.w * np.asarray(f))
    return np.sum(a.filled() * synth * coeff[None, :], axis=1)


def _check_shape(model: SpectralModel, a: Symbol) -> None:
    if a.shape != (model.grid.count, model.size):
        raise QuantizeError(f"symbol shape {a.shape} does not match model "
                            f"{(model.grid.count, model.size)}")


def extract_columns(model: SpectralModel, columns: np.ndarray, eps: float = 1e-6,
                    flavor: str = L_FLAVOR, order: float = 0.0, rho: float = 1.0,
                    delta: float = 0.0) -> Symbol:
    """Divide ``columns[:, k]`` by ``u_xi`` (or ``v_xi``) with the zero-set mask."""
    base = model.U if flavor == L_FLAVOR else model.V
    sup = np.abs(base).max(axis=0)
    mask = np.abs(base) <= eps * sup[None, :]
    safe = np.where(mask, 1.0, base)
    table = np.where(mask, 0.0, columns / safe)
    dead = np.nonzero(mask.all(axis=0))[0]
    if dead.size:
        log.warning("symbol extraction: %d all-masked columns", dead.size)
    return Symbol(table, order, rho, delta, mask, flavor)


def symbol_of_operator(model: SpectralModel, A: OperatorMatrix, eps: float = 1e-6,
                       flavor: str = L_FLAVOR, order: float = 0.0, rho: float = 1.0,
                       delta: float = 0.0) -> Symbol:
    """``sigma_A(x, xi) = u_xi(x)^{-1} (A u_xi)(x)``; ``flavor='L*'`` uses ``v_xi``."""
    if not eps > 0:
        raise QuantizeError("eps must be positive")
    base = model.U if flavor == L_FLAVOR else model.V
    return extract_columns(model, A.apply(base), eps, flavor, order, rho, delta)


# ── amplitudes ──────────────────────────────────────────────────────────────


AmplitudeSlice = Callable[[int], np.ndarray]


def amplitude_slices(model: SpectralModel, amp) -> AmplitudeSlice:
    """Normalize an amplitude to a ``k -> a[:, :, k]`` accessor.

    ``amp`` is a dense ``(N_x, N_x, n)`` table or a callable returning the
    ``(N_x, N_x)`` slice for index position ``k``.
    """
    if callable(amp):
        return amp
    tab = np.asarray(amp)
    if tab.shape != (model.grid.count, model.grid.count, model.size):
        raise QuantizeError("amplitude table must have shape (N_x, N_x, n)")
    return lambda k: tab[:, :, k]


def op_from_amplitude(model: SpectralModel, amp) -> OperatorMatrix:
    """``K(x, y) = sum_xi u_xi(x) conj(v_xi(y)) a(x, y, xi)``."""
    get = amplitude_slices(model, amp)
    K = np.zeros((model.grid.count, model.grid.count), dtype=complex)
    for k in range(model.size):
        K += get(k) * np.multiply.outer(model.U[:, k], model.V[:, k].conj())
    return OperatorMatrix(K, model.w)


# ── multipliers and adjoints ────────────────────────────────────────────────


def multiplier_op(model: SpectralModel, sigma, flavor: str = L_FLAVOR) -> OperatorMatrix:
    """Diagonal action on ``f^`` (flavor ``L``) or on ``f^_*`` (flavor ``L*``)."""
    sig = np.asarray(sigma, dtype=complex)
    if sig.shape != (model.size,):
        raise QuantizeError("multiplier needs one value per index")
    synth, anal = _synth_analysis(model, flavor)
    return OperatorMatrix((synth * sig[None, :]) @ anal.conj().T, model.w)


def adjoint_op(model: SpectralModel, A: OperatorMatrix) -> OperatorMatrix:
    """Adjoint with respect to the quadrature inner product: ``K*(x, y) = conj K(y, x)``."""
    return A.adjoint()


# ── admissibility diagnostic ────────────────────────────────────────────────


@dataclass(frozen=True)
class AdmissibilityReport:
    masked_fraction: float
    reproduction_error: float
    threshold: float
    admissible: bool


def admissibility_report(model: SpectralModel, A: OperatorMatrix, eps: float = 1e-6,
                         threshold: float = 0.2) -> AdmissibilityReport:
    """Extract the symbol, re-synthesize, and compare on the truncated span."""
    sig = symbol_of_operator(model, A, eps)
    B = op_from_symbol(model, sig)
    AU = A.apply(model.U)
    err = float(np.max(np.abs(B.apply(model.U) - AU)) / max(np.max(np.abs(AU)), 1e-300))
    ok = sig.masked_fraction < threshold
    return AdmissibilityReport(sig.masked_fraction, err, threshold, bool(ok))


# ── symbol input ────────────────────────────────────────────────────────────

_XDEP = {
    "sin": lambda x: np.sin(2 * np.pi * x),
    "cos": lambda x: np.cos(2 * np.pi * x),
    "x": lambda x: x,
    "exp": lambda x: np.exp(2j * np.pi * x),
}


def generated_symbol(model: SpectralModel, expr: str) -> Symbol:
    """Symbol from a ``+``-separated expression of built-in generators.

    Generators: ``lambda`` (the eigenvalue, order m in weight units),
    ``one``, ``gauss_decay(s)`` = ``exp(-(xi/s)^2)``, ``poly_decay(m)`` =
    ``<xi>^{-m}``, ``xdep(name)`` with name in sin, cos, x, exp.  A term may be a
    product of generators joined by ``*``.
    """
    total = None
    order = -np.inf
    for term in [t.strip() for t in expr.split("+") if t.strip()]:
        tab = np.ones((model.grid.count, model.size), dtype=complex)
        t_order = 0.0
        for factor in [f.strip() for f in term.split("*")]:
            tab = tab * _generator(model, factor)
            t_order += _generator_order(model, factor)
        total = tab if total is None else total + tab
        order = max(order, t_order)
    if total is None:
        raise QuantizeError("empty symbol expression")
    return Symbol(total, float(order))


def _generator(model: SpectralModel, name: str) -> np.ndarray:
    xi = model.indices[None, :].astype(float)
    x = model.x[:, None]
    if name == "lambda":
        return np.broadcast_to(model.eigenvalues[None, :], (x.size, xi.size))
    if name == "one":
        return np.ones((x.size, xi.size))
    m = re.fullmatch(r"(gauss_decay|poly_decay|xdep)\(([^)]*)\)", name)
    if not m:
        raise QuantizeError(f"unknown symbol generator {name!r}")
    kind, arg = m.groups()
    if kind == "xdep":
        if arg not in _XDEP:
            raise QuantizeError(f"unknown xdep function {arg!r}")
        return np.broadcast_to(_XDEP[arg](x), (x.size, xi.size))
    val = float(arg)
    if kind == "gauss_decay":
        return np.broadcast_to(np.exp(-((xi / val) ** 2)), (x.size, xi.size))
    return np.broadcast_to(model.weights[None, :] ** (-val), (x.size, xi.size))


def _generator_order(model: SpectralModel, name: str) -> float:
    if name == "lambda":
        return float(model.m)  # |lambda| ~ <xi>^m
    if name.startswith("poly_decay"):
        return -float(name[len("poly_decay("):-1])
    if name.startswith("gauss_decay"):
        return -np.inf
    return 0.0


def read_symbol_csv(model: SpectralModel, path: str | Path, order: float = 0.0) -> Symbol:
    """Read ``x_index, xi, re, im`` rows; missing entries are masked."""
    tab = np.zeros((model.grid.count, model.size), dtype=complex)
    seen = np.zeros(tab.shape, bool)
    pos = {int(xi): k for k, xi in enumerate(model.indices)}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            try:
                i, k = int(row["x_index"]), pos[int(row["xi"])]
                tab[i, k] = float(row["re"]) + 1j * float(row["im"])
            except (KeyError, ValueError, IndexError) as exc:
                raise QuantizeError(f"bad symbol row {row}: {exc}") from None
            seen[i, k] = True
    return Symbol(tab, order, mask=~seen)


def write_symbol_csv(model: SpectralModel, a: Symbol, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x_index", "xi", "re", "im"])
        for i in range(a.shape[0]):
            for k, xi in enumerate(model.indices):
                if a.mask is not None and a.mask[i, k]:
                    continue
                v = a.table[i, k]
                w.writerow([i, int(xi), format(v.real, ".17g"), format(v.imag, ".17g")])
