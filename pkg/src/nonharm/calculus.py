"""Symbol classes and the asymptotic expansions for products, adjoints and amplitudes.

Every expansion is compared against an exact symbol obtained by extraction from
the dense operator on the truncated span.  Remainders are summarized per index by
``sup_x |r(x, xi)|`` and fitted against ``<xi>`` on the reliable band (the middle
two quartiles of ``<xi>``), where neither preasymptotics nor truncation edges
dominate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from math import factorial
from typing import Sequence

import numpy as np

from .differences import (D_alpha_function, D_alpha_x, DifferenceFamily, delta_powers,
                          delta_q)
from .oracle import FitResult, loglog_fit, reliable_band
from .quantize import (LSTAR_FLAVOR, L_FLAVOR, OperatorMatrix, Symbol, extract_columns,
                       kernel_of_symbol, op_from_amplitude, symbol_of_operator)
from .spectral_model import SpectralModel

log = logging.getLogger(__name__)


class CalculusError(ValueError):
    """Invalid request, e.g. a symbol class with ``rho <= delta``."""


def require_rho_gt_delta(rho: float, delta: float) -> None:
    if not rho > delta:
        raise CalculusError(
            f"expansion theorems need rho > delta (got rho={rho}, delta={delta}); "
            "the remainder orders m - (rho - delta) N do not decrease otherwise")


# ── remainder profiles and fits ─────────────────────────────────────────────


def sup_profile(a: Symbol) -> np.ndarray:
    """``sup_x |a(x, xi)|`` over unmasked samples, one value per index."""
    return np.max(np.abs(a.filled()), axis=0)


@dataclass(frozen=True)
class OrderFit:
    """Fitted growth exponent of an index profile on the reliable band."""

    exponent: float
    band_max: float
    vanishing: bool
    fit: FitResult | None


def fit_order(model: SpectralModel, profile: np.ndarray, scale: float,
              zero_floor: float = 1e-9, band: tuple[float, float] | None = None) -> OrderFit:
    """Slope of ``log profile`` against ``log <xi>`` on the band.

    A profile whose band maximum is at most ``zero_floor * scale`` is reported as
    vanishing with exponent ``-inf``.
    """
    wts = model.weights
    band = reliable_band(wts) if band is None else band
    inband = (wts >= band[0]) & (wts <= band[1])
    bmax = float(np.max(profile[inband])) if inband.any() else 0.0
    if bmax <= zero_floor * max(scale, 1e-300):
        return OrderFit(-np.inf, bmax, True, None)
    fit = loglog_fit(wts, profile, band)
    return OrderFit(fit.slope, bmax, False, fit)


# ── symbol classes ──────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SymbolClassReport:
    claim: float
    rho: float
    delta: float
    slopes: np.ndarray              # [alpha, beta]
    seminorms: np.ndarray           # [alpha, beta, xi]  sup_x |Delta^alpha D^(beta) a|
    r2: np.ndarray
    tol: float

    @property
    def m_fit(self) -> float:
        return float(self.slopes[0, 0])

    def bound(self, alpha: int, beta: int) -> float:
        return self.claim - self.rho * alpha + self.delta * beta

    @property
    def verdict(self) -> bool:
        na, nb = self.slopes.shape
        return all(self.slopes[a, b] <= self.bound(a, b) + self.tol
                   for a in range(na) for b in range(nb))


def classify_symbol(model: SpectralModel, a: Symbol, claim: float | None = None,
                    rho: float = 1.0, delta: float = 0.0, alpha_max: int = 4, beta_max: int = 2,
                    fam: DifferenceFamily | None = None, eps: float = 1e-6, tol: float = 0.3,
                    zero_floor: float = 1e-9) -> SymbolClassReport:
    """Fit the growth of ``sup_x |Delta_q^alpha D^(beta) a|`` for every ``(alpha, beta)``."""
    if fam is None:
        raise CalculusError("a difference family is required")
    if a.mask is not None and a.mask.all():
        raise CalculusError("symbol is masked everywhere")
    claim = a.order if claim is None else claim
    scale = float(np.max(np.abs(a.filled())))
    slopes = np.zeros((alpha_max + 1, beta_max + 1))
    r2 = np.ones_like(slopes)
    semi = np.zeros((alpha_max + 1, beta_max + 1, model.size))
    for beta in range(beta_max + 1):
        db = D_alpha_x(model, a, beta, fam)
        for alpha, d in enumerate(delta_powers(model, db, alpha_max, fam, eps)):
            prof = sup_profile(d)
            semi[alpha, beta] = prof
            of = fit_order(model, prof, scale, zero_floor)
            slopes[alpha, beta] = of.exponent
            r2[alpha, beta] = of.fit.r2 if of.fit is not None else 1.0
    return SymbolClassReport(float(claim), rho, delta, slopes, semi, r2, tol)


# ── asymptotic sums ─────────────────────────────────────────────────────────


def asymptotic_sum(symbols: Sequence[Symbol]) -> Symbol:
    """Plain sum over a finite index set; the order is the leading one."""
    if not symbols:
        raise CalculusError("empty asymptotic sum")
    out = symbols[0]
    for s in symbols[1:]:
        out = out + s
    return out.with_table(out.table, order=max(s.order for s in symbols))


def asymptotic_sum_orders(model: SpectralModel, symbols: Sequence[Symbol],
                          zero_floor: float = 1e-9) -> list[OrderFit]:
    """Fitted order of ``sigma - sum_{j<N} sigma_j`` for ``N = 1..len``."""
    total = asymptotic_sum(symbols)
    scale = float(np.max(sup_profile(total)))
    out, partial = [], None
    for s in symbols:
        partial = s if partial is None else partial + s
        out.append(fit_order(model, sup_profile(total - partial), scale, zero_floor))
    return out


# ── expansion results ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class ExpansionResult:
    """Truncated expansions for ``N = 1..N_max`` and their measured remainders."""

    partial_sums: list[Symbol]
    exact: Symbol
    orders: list[OrderFit]
    targets: list[float]
    tol: float = 0.3
    terms: list[Symbol] = field(default_factory=list)

    @property
    def exponents(self) -> list[float]:
        return [o.exponent for o in self.orders]

    @property
    def n_max(self) -> int:
        return len(self.partial_sums)

    @property
    def truncated(self) -> Symbol:
        return self.partial_sums[-1]

    def decrements(self) -> list[float]:
        e = self.exponents
        return [a - b for a, b in zip(e, e[1:])]

    def within_targets(self) -> list[bool]:
        return [o.exponent <= t + self.tol for o, t in zip(self.orders, self.targets)]

    @property
    def passed(self) -> bool:
        return all(self.within_targets())

    def monotone(self) -> bool:
        e = self.exponents
        return all(b <= a + self.tol for a, b in zip(e, e[1:]))


def _expansion(model: SpectralModel, exact: Symbol, terms: list[Symbol], base_order: float,
               step: float, tol: float, zero_floor: float) -> ExpansionResult:
    scale = float(np.max(sup_profile(exact)))
    partials, orders, targets = [], [], []
    partial = None
    for n, t in enumerate(terms, start=1):
        partial = t if partial is None else partial + t
        partials.append(partial)
        orders.append(fit_order(model, sup_profile(exact - partial), scale, zero_floor))
        targets.append(base_order - step * n)
    return ExpansionResult(partials, exact, orders, targets, tol, terms)


# ── composition ─────────────────────────────────────────────────────────────


def compose_exact(model: SpectralModel, a: Symbol, b: Symbol, eps: float = 1e-6) -> Symbol:
    """Symbol of ``Op(a) Op(b)`` by applying both kernels to the ``u`` columns."""
    A = OperatorMatrix(kernel_of_symbol(model, a), model.w)
    B = OperatorMatrix(kernel_of_symbol(model, b), model.w)
    cols = A.apply(B.apply(model.U))
    return extract_columns(model, cols, eps, L_FLAVOR, a.order + b.order, a.rho, max(a.delta, b.delta))


def composition_terms(model: SpectralModel, a: Symbol, b: Symbol, n_terms: int,
                      fam: DifferenceFamily, eps: float = 1e-6) -> list[Symbol]:
    """``(1/alpha!) (Delta^alpha a) (D^(alpha) b)`` for ``alpha < n_terms``."""
    diffs = delta_powers(model, a, n_terms - 1, fam, eps)
    return [diffs[al] * D_alpha_x(model, b, al, fam) * (1.0 / factorial(al))
            for al in range(n_terms)]


def compose_symbols(model: SpectralModel, a: Symbol, b: Symbol, n_terms: int,
                    fam: DifferenceFamily, rho: float = 1.0, delta: float = 0.0,
                    eps: float = 1e-6, tol: float = 0.3, zero_floor: float = 1e-9) -> ExpansionResult:
    """Expansion of the symbol of ``Op(a) Op(b)``; targets ``m_a + m_b - (rho - delta) N``."""
    require_rho_gt_delta(rho, delta)
    exact = compose_exact(model, a, b, eps)
    terms = composition_terms(model, a, b, n_terms, fam, eps)
    return _expansion(model, exact, terms, a.order + b.order, rho - delta, tol, zero_floor)


# ── adjoints ────────────────────────────────────────────────────────────────


def adjoint_exact(model: SpectralModel, a: Symbol, eps: float = 1e-6) -> Symbol:
    """``L*``-symbol of the adjoint of ``Op(a)`` from the dense adjoint kernel."""
    Astar = OperatorMatrix(kernel_of_symbol(model, a), model.w).adjoint()
    return symbol_of_operator(model, Astar, eps, LSTAR_FLAVOR, a.order, a.rho, a.delta)


def adjoint_terms(model: SpectralModel, a: Symbol, n_terms: int, fam: DifferenceFamily,
                  eps: float = 1e-6) -> list[Symbol]:
    """``(1/alpha!) Delta~^alpha conj(D^(alpha) a)`` with ``q~ = conj(q)``.

    ``conj(D^(alpha) a)`` equals ``D~^(alpha) conj(a)`` for the conjugate family, so
    the input family drives the x-derivatives and its conjugate drives the
    differences of the resulting ``L*``-symbol.
    """
    cfam = fam.conj()
    out = []
    for al in range(n_terms):
        d = D_alpha_x(model, a, al, fam).conj()
        d = Symbol(d.table, d.order, d.rho, d.delta, d.mask, LSTAR_FLAVOR)
        out.append(delta_q(model, d, al, cfam, eps) * (1.0 / factorial(al)))
    return out


def adjoint_symbol(model: SpectralModel, a: Symbol, n_terms: int, fam: DifferenceFamily,
                   rho: float = 1.0, delta: float = 0.0, eps: float = 1e-6, tol: float = 0.3,
                   zero_floor: float = 1e-9) -> ExpansionResult:
    """Expansion of the ``L*``-symbol of ``Op(a)^*``; targets ``m - (rho - delta) N``."""
    require_rho_gt_delta(rho, delta)
    if a.flavor != L_FLAVOR:
        raise CalculusError("adjoint expansion expects an L-symbol")
    exact = adjoint_exact(model, a, eps)
    terms = adjoint_terms(model, a, n_terms, fam, eps)
    return _expansion(model, exact, terms, a.order, rho - delta, tol, zero_floor)


def lstar_to_l_symbol(model: SpectralModel, t: Symbol, eps: float = 1e-6) -> Symbol:
    """Re-express an ``L*``-symbol as the ``L``-symbol of the same operator."""
    K = kernel_of_symbol(model, t)
    return symbol_of_operator(model, OperatorMatrix(K, model.w), eps, L_FLAVOR, t.order, t.rho, t.delta)


# ── amplitudes ──────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SeparableAmplitude:
    """``a(x, y, xi) = sum_t X_t(x, xi) Y_t(y)`` with ``X_t`` an ``(N_x, n)`` table."""

    x_tables: tuple[np.ndarray, ...]
    y_funcs: tuple[np.ndarray, ...]
    order: float = 0.0

    def slice(self, k: int) -> np.ndarray:
        out = 0
        for X, Y in zip(self.x_tables, self.y_funcs):
            out = out + np.multiply.outer(X[:, k], Y)
        return out


def amplitude_terms(model: SpectralModel, amp: SeparableAmplitude, n_terms: int,
                    fam: DifferenceFamily, eps: float = 1e-6) -> list[Symbol]:
    """``(1/alpha!) Delta^alpha [D_y^(alpha) a(x, y, xi)]_{y=x}``."""
    out = []
    for al in range(n_terms):
        tab = 0
        for X, Y in zip(amp.x_tables, amp.y_funcs):
            tab = tab + X * D_alpha_function(fam, Y, al)[:, None]
        s = Symbol(np.asarray(tab, dtype=complex) * np.ones((1, model.size)), amp.order)
        out.append(delta_q(model, s, al, fam, eps) * (1.0 / factorial(al)))
    return out


def amplitude_to_symbol(model: SpectralModel, amp: SeparableAmplitude, n_terms: int,
                        fam: DifferenceFamily, rho: float = 1.0, delta: float = 0.0,
                        eps: float = 1e-6, tol: float = 0.3,
                        zero_floor: float = 1e-9) -> ExpansionResult:
    """Reduce an amplitude operator to its symbol; exact reference from the dense kernel."""
    require_rho_gt_delta(rho, delta)
    A = op_from_amplitude(model, amp.slice)
    exact = symbol_of_operator(model, A, eps, L_FLAVOR, amp.order)
    terms = amplitude_terms(model, amp, n_terms, fam, eps)
    return _expansion(model, exact, terms, amp.order, rho - delta, tol, zero_floor)
