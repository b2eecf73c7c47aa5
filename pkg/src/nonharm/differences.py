"""Difference operators on symbols and the dual x-derivatives ``D^(alpha)``.

A family ``q(x, y)`` vanishing exactly on the diagonal turns kernel multiplication
into a frequency difference: ``Delta_q^alpha a`` is the symbol of the operator with
kernel ``q^alpha(x, y) K_A(x, y)``.  The dual operators ``D^(alpha)`` are the
coefficients of the Taylor-type expansion ``g(x) ~ sum (1/alpha!) D^(alpha) g(e)
q^alpha(e, x)`` and are recovered from ordinary derivatives by a triangular solve.

Two ways of applying ``D^(alpha)`` to a symbol are provided:

* :func:`D_alpha_symbol` differentiates the kernel ``K_A(x, y)`` in ``x`` and
  re-extracts, i.e. returns ``u_xi^{-1} D^(alpha)(u_xi a(., xi))``;
* :func:`D_alpha_x` differentiates ``x -> a(x, xi)`` itself, which is the form
  entering the composition, adjoint and parametrix expansions.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import comb, factorial

import numpy as np

from .oracle import loglog_fit
from .quantize import (L_FLAVOR, OperatorMatrix, Symbol, extract_columns,
                       kernel_of_symbol)
from .spectral_model import Grid, SpectralModel

log = logging.getLogger(__name__)

FAMILY_KINDS = ("exp_diff", "poly_diff")


class FamilyError(ValueError):
    """Unknown family or failed admissibility check."""


@dataclass(frozen=True, eq=False)
class DifferenceFamily:
    """A single (l = 1) strongly admissible function ``q(x, y)``.

    ``exp_diff``: ``q = e^{2 pi i (y - x)} - 1``; ``poly_diff``: ``q = y - x``.
    ``conjugate=True`` selects ``conj(q)``.
    """

    kind: str
    grid: Grid
    conjugate: bool = False

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise FamilyError(f"unknown family {self.kind!r}")

    @property
    def _sign(self) -> float:
        return -1.0 if self.conjugate else 1.0

    def q(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if self.kind == "exp_diff":
            return np.exp(2j * np.pi * self._sign * (y - x)) - 1.0
        return (y - x) + 0j

    def dq_diag(self) -> complex:
        """``d/dy q(x, y)`` at ``y = x`` (constant for both families)."""
        return 2j * np.pi * self._sign if self.kind == "exp_diff" else 1.0 + 0j

    @cached_property
    def matrix(self) -> np.ndarray:
        x = self.grid.nodes
        return self.q(x[:, None], x[None, :])

    def power(self, alpha: int) -> np.ndarray:
        return self.matrix**alpha if alpha else np.ones_like(self.matrix)

    def conj(self) -> "DifferenceFamily":
        return DifferenceFamily(self.kind, self.grid, not self.conjugate)

    def taylor_table(self, beta_max: int) -> np.ndarray:
        return _taylor_table(self.kind, self._sign, int(beta_max))


def make_family(kind: str, grid: Grid, conjugate: bool = False) -> DifferenceFamily:
    """Build a family and verify diagonal vanishing, normal derivative and off-diagonal zeros."""
    fam = DifferenceFamily(kind, grid, conjugate)
    rep = family_invariants(fam)
    if not rep["ok"]:
        raise FamilyError(f"family {kind} failed admissibility checks: {rep}")
    return fam


def family_invariants(fam: DifferenceFamily) -> dict:
    x = fam.grid.nodes
    diag = float(np.max(np.abs(fam.q(x, x))))
    h = 1e-5
    dq = (fam.q(x, x + h) - fam.q(x, x - h)) / (2 * h)
    dmin = float(np.min(np.abs(dq)))
    Q = np.abs(fam.matrix)
    far = np.abs(x[:, None] - x[None, :]) > fam.grid.spacing
    offmin = float(Q[far].min())
    return {"diag_max": diag, "dq_min": dmin, "offdiag_min": offmin,
            "ok": diag == 0.0 and dmin > 0 and offmin > 0}


# ── Taylor tables ───────────────────────────────────────────────────────────


@lru_cache(maxsize=64)
def _taylor_integers(kind: str, beta_max: int) -> tuple[tuple[int, ...], ...]:
    """Unit lower triangular integer factor ``S`` of ``T = diag(scale) S``."""
    n = beta_max + 1
    rows = []
    for b in range(n):
        row = []
        for a in range(n):
            if kind == "poly_diff" or a > b:
                row.append(int(a == b))
            else:
                # q(e, x)^a = sum_k C(a, k) (-1)^(a-k) e^{2 pi i s k (x - e)}
                total = sum(comb(a, k) * (-1) ** (a - k) * k**b for k in range(a + 1))
                row.append(total // factorial(a) if b else int(a == 0))
        rows.append(tuple(row))
    return tuple(rows)


def _unit_lower_inverse(S: tuple[tuple[int, ...], ...]) -> list[list[int]]:
    n = len(S)
    inv = [[0] * n for _ in range(n)]
    for j in range(n):
        for i in range(j, n):
            inv[i][j] = int(i == j) - sum(S[i][k] * inv[k][j] for k in range(j, i))
    return inv


def _taylor_scale(kind: str, sign: float, beta_max: int) -> np.ndarray:
    b = np.arange(beta_max + 1)
    if kind == "poly_diff":
        return np.ones(b.size, dtype=complex)
    return (2j * np.pi * sign) ** b


def _taylor_table(kind: str, sign: float, beta_max: int) -> np.ndarray:
    S = np.array(_taylor_integers(kind, beta_max), dtype=float)
    return _taylor_scale(kind, sign, beta_max)[:, None] * S


@dataclass(frozen=True)
class TaylorTables:
    """``T[beta, alpha] = (1/alpha!) d^beta q^alpha(e, x)|_{x=e}`` and its inverse.

    Both families are translation invariant, so one table serves every point ``e``.
    ``T = diag(scale) S`` with ``S`` integer and unit lower triangular, so the
    inverse ``S^{-1} diag(1/scale)`` is computed exactly in integer arithmetic.
    """

    T: np.ndarray
    Tinv: np.ndarray
    integers: np.ndarray
    integers_inv: np.ndarray

    def residual(self) -> float:
        """``max |S S^{-1} - I|`` of the integer factors.

        The unbalanced product ``T T^{-1}`` loses digits to cancellation between
        rows scaled like ``(2 pi)^beta``, which says nothing about the inverse.
        """
        prod = self.integers @ self.integers_inv
        return float(np.max(np.abs(prod - np.eye(self.T.shape[0]))))


def taylor_coeff_operators(fam: DifferenceFamily, beta_max: int) -> TaylorTables:
    S = _taylor_integers(fam.kind, int(beta_max))
    Sinv = np.array(_unit_lower_inverse(S), dtype=float)
    scale = _taylor_scale(fam.kind, fam._sign, int(beta_max))
    S = np.array(S, dtype=float)
    return TaylorTables(scale[:, None] * S, Sinv / scale[None, :], S, Sinv)


def D_alpha_values(fam: DifferenceFamily, derivs: list[np.ndarray], alpha: int) -> np.ndarray:
    """Combine ordinary derivatives ``[g, g', ...]`` into ``D^(alpha) g``."""
    tabs = taylor_coeff_operators(fam, alpha)
    out = np.zeros_like(derivs[0], dtype=complex)
    for beta in range(alpha + 1):
        c = tabs.Tinv[alpha, beta]
        if c != 0:
            out = out + c * derivs[beta]
    return out


def D_alpha_function(fam: DifferenceFamily, g, alpha: int, axis: int = 0, valid=None) -> np.ndarray:
    """``D^(alpha) g`` at every grid point (spectral derivatives + triangular solve)."""
    if alpha == 0:
        return np.asarray(g, dtype=complex)
    derivs = fam.grid.derivatives(np.asarray(g, dtype=complex), alpha, axis=axis, valid=valid)
    return D_alpha_values(fam, derivs, alpha)


# ── differences and derivatives on symbols ──────────────────────────────────


def _base(model: SpectralModel, flavor: str) -> np.ndarray:
    return model.U if flavor == L_FLAVOR else model.V


def delta_q(model: SpectralModel, a: Symbol, alpha: int, fam: DifferenceFamily,
            eps: float = 1e-6, kernel: np.ndarray | None = None) -> Symbol:
    """``Delta_q^alpha a``: multiply the kernel by ``q^alpha`` and re-extract.

    ``kernel`` may pass a precomputed ``kernel_of_symbol(model, a)``.
    """
    if alpha < 0:
        raise FamilyError("alpha must be nonnegative")
    if alpha == 0:
        return a
    K = kernel_of_symbol(model, a) if kernel is None else kernel
    base = _base(model, a.flavor)
    cols = (K * fam.power(alpha)) @ (model.w[:, None] * base)
    out = extract_columns(model, cols, eps, a.flavor, a.order - a.rho * alpha, a.rho, a.delta)
    return out


def delta_powers(model: SpectralModel, a: Symbol, alpha_max: int, fam: DifferenceFamily,
                 eps: float = 1e-6) -> list[Symbol]:
    """``[Delta^0 a, ..., Delta^alpha_max a]`` sharing one kernel synthesis."""
    K = kernel_of_symbol(model, a) if alpha_max else None
    return [delta_q(model, a, al, fam, eps, K) for al in range(alpha_max + 1)]


def D_alpha_symbol(model: SpectralModel, a: Symbol, alpha: int, fam: DifferenceFamily,
                   eps: float = 1e-6) -> Symbol:
    """Symbol of the operator with kernel ``D_x^(alpha) K_A(x, y)``."""
    if alpha == 0:
        return a
    base = _base(model, a.flavor)
    cols = OperatorMatrix(kernel_of_symbol(model, a), model.w).apply(base)
    dcols = D_alpha_function(fam, cols, alpha, axis=0)
    return extract_columns(model, dcols, eps, a.flavor, a.order + a.delta * alpha, a.rho, a.delta)


def D_alpha_x(model: SpectralModel, a: Symbol, alpha: int, fam: DifferenceFamily) -> Symbol:
    """Apply ``D^(alpha)`` to ``x -> a(x, xi)`` column by column.

    Masked samples are excluded from the spectral fit; the mask is kept.
    """
    if alpha == 0:
        return a
    valid = None if a.mask is None else ~a.mask
    tab = D_alpha_function(fam, a.filled(), alpha, axis=0, valid=valid)
    return a.with_table(tab, order=a.order + a.delta * alpha)


# ── Taylor remainder ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TaylorRemainderReport:
    N: int
    slope: float
    max_remainder: float
    exact: bool
    passed: bool
    r2: float


def taylor_remainder_check(fam: DifferenceFamily, g, e_index: int, N: int, radius: float = 0.1,
                           exclude_cells: int = 2, slack: float = 0.3,
                           floor: float = 1e-10) -> TaylorRemainderReport:
    """Fit the remainder of the ``N``-term expansion of ``g`` around ``x_e`` against ``|q|``.

    The remainder is sampled on ``|x - e| <= radius`` minus ``exclude_cells`` grid
    cells around ``e``.  A remainder below ``floor * max|g|`` counts as exact.
    """
    grid = fam.grid
    g = np.asarray(g, dtype=complex)
    x = grid.nodes
    e = x[e_index]
    derivs = grid.derivatives(g, max(N - 1, 0))
    qe = fam.q(e, x)
    approx = np.zeros_like(g)
    for al in range(N):
        dval = D_alpha_values(fam, [d[e_index] for d in derivs[: al + 1]], al)
        approx = approx + dval / factorial(al) * qe**al
    idx = np.arange(x.size)
    near = (np.abs(x - e) <= radius) & (np.abs(idx - e_index) > exclude_cells)
    r = np.abs(g - approx)[near]
    scale = max(float(np.max(np.abs(g))), 1e-300)
    rmax = float(r.max()) if r.size else 0.0
    if rmax <= floor * scale:
        return TaylorRemainderReport(N, np.inf, rmax, True, True, 1.0)
    keep = r > floor * scale
    fit = loglog_fit(np.abs(qe[near][keep]), r[keep], band=None)
    return TaylorRemainderReport(N, fit.slope, rmax, False, fit.slope >= N - slack, fit.r2)


def projection_leakage(model: SpectralModel, fam: DifferenceFamily, probe_count: int = 8,
                       seed: int = 0, y_points: int = 5) -> float:
    """Largest energy fraction of ``q(., y) f`` outside the truncated span.

    ``f`` runs over smooth band-limited probes and ``y`` over a few interior
    points; a small value indicates that multiplication by ``q`` preserves the
    boundary conditions encoded in the eigenfunctions.
    """
    from .spectral_model import probe_coefficients

    F = model.U @ probe_coefficients(model, probe_count, seed)
    worst = 0.0
    for y in np.linspace(0.1, 0.9, y_points):
        G = fam.q(model.x, y)[:, None] * F
        proj = model.U @ (model.V.conj().T @ (model.w[:, None] * G))
        num = np.sum(model.w[:, None] * np.abs(G - proj) ** 2, axis=0)
        den = np.sum(model.w[:, None] * np.abs(G) ** 2, axis=0)
        worst = max(worst, float(np.max(num / den)))
    return worst
