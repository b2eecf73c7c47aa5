"""Ellipticity, parametrices, boundedness estimates and kernel decay.

Symbols that must be rebuilt at another truncation are passed as *symbol
factories*, callables ``model -> Symbol``; this is how the a priori and kernel
checks compare ``Xi`` with ``2 Xi``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import factorial
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh

from .calculus import fit_order, require_rho_gt_delta, sup_profile
from .differences import D_alpha_x, DifferenceFamily, delta_powers
from .oracle import FitResult, loglog_fit, reliable_band
from .quantize import OperatorMatrix, Symbol, kernel_of_symbol, op_from_symbol
from .spectral_model import SpectralModel, frame_bounds, probe_coefficients, with_truncation
from .transform import forward, sobolev_norm

log = logging.getLogger(__name__)

SymbolFactory = Callable[[SpectralModel], Symbol]


class EllipticityError(ValueError):
    """The principal symbol is not elliptic, or a division would underflow."""


# ── ellipticity ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class EllipticityReport:
    """``margins[k] = min_x |sigma(x, xi_k)| / <xi_k>^mu``.

    ``N0`` is the smallest ``|xi|`` from which every index with a larger weight
    keeps at least half the tail margin; ``C0`` is the minimum margin there.
    """

    mu: float
    margins: np.ndarray
    tail_margin: float
    N0: int
    C0: float
    passed: bool

    def region(self, model: SpectralModel) -> np.ndarray:
        """Indices where the reciprocal of the symbol is taken."""
        return model.weights >= _weight_at(model, self.N0) * (1 - 1e-12)


def _weight_at(model: SpectralModel, n0: int) -> float:
    a = np.abs(model.indices)
    return float(model.weights[a >= n0].min())


def segment_min_abs(table: np.ndarray, valid: np.ndarray | None = None) -> np.ndarray:
    """Per-column minimum of ``|f|`` over nodes and the chords between neighbours.

    Zeros that fall between two nodes are caught by the chord minimum.
    """
    f = np.asarray(table, dtype=complex)
    ok = np.ones(f.shape, bool) if valid is None else valid
    node = np.where(ok, np.abs(f), np.inf).min(axis=0)
    a, b = f[:-1], f[1:]
    d = b - a
    den = np.abs(d) ** 2
    t = np.clip(-np.real(np.conj(d) * a) / np.where(den > 0, den, 1.0), 0.0, 1.0)
    chord = np.abs(a + t * d)
    chord = np.where(ok[:-1] & ok[1:], chord, np.inf).min(axis=0)
    return np.minimum(node, chord)


def check_elliptic(model: SpectralModel, sigma: Symbol, mu: float, floor: float = 1e-8) -> EllipticityReport:
    margins = segment_min_abs(sigma.table, None if sigma.mask is None else ~sigma.mask) / model.weights**mu
    wts = model.weights
    tail = wts >= np.median(wts)
    tail_margin = float(margins[tail].min())
    if not tail_margin > floor:
        return EllipticityReport(mu, margins, tail_margin, int(np.abs(model.indices).max()) + 1, 0.0, False)
    order = np.argsort(wts, kind="stable")
    bad = np.nonzero(margins[order] < 0.5 * tail_margin)[0]
    start = 0 if bad.size == 0 else bad[-1] + 1
    if start >= order.size:
        return EllipticityReport(mu, margins, tail_margin, int(np.abs(model.indices).max()) + 1, 0.0, False)
    n0 = int(np.abs(model.indices[order[start:]]).min())
    # the threshold is an |xi| level, so re-close the region under weight ordering
    reg = wts >= _weight_at(model, n0) * (1 - 1e-12)
    while margins[reg].min() < 0.5 * tail_margin:
        n0 += 1
        reg = wts >= _weight_at(model, n0) * (1 - 1e-12)
    C0 = float(margins[reg].min())
    return EllipticityReport(mu, margins, tail_margin, n0, C0, C0 > floor)


# ── parametrix ──────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ParametrixResult:
    B: list[Symbol]
    sigma_B: Symbol
    residuals: np.ndarray            # band-restricted operator norms r_N
    residuals_full: np.ndarray       # norms over the whole truncated span (soft)
    band_ratios: np.ndarray          # [N, k] ||R_N u_k|| / ||u_k||
    band_exponents: np.ndarray       # fitted exponents of band_ratios on the band
    B_orders: np.ndarray             # fitted orders of the B_k
    ellipticity: EllipticityReport
    band: tuple[float, float]

    def monotone(self, uptick: float = 0.05) -> bool:
        r = self.residuals
        ups = [b > a for a, b in zip(r, r[1:])]
        big = [b > a * (1 + uptick) for a, b in zip(r, r[1:])]
        return not any(big) and sum(ups) <= 1

    def strictly_decreasing(self) -> bool:
        r = self.residuals
        return all(b < a for a, b in zip(r, r[1:]))


def parametrix(model: SpectralModel, parts: Sequence[Symbol], mu: float, n_max: int,
               fam: DifferenceFamily, rho: float = 1.0, delta: float = 0.0,
               eps: float = 1e-6, zero_floor: float = 1e-9) -> ParametrixResult:
    """Recursive parametrix for ``A = sum_j Op(A_j)`` with ``A_0`` principal.

    ``B_0 = 1 / A_0`` where ``<xi> >= <N0>`` (zero below) and
    ``B_N = -(1/A_0) sum_{k<N} sum_{j<=N-k} (1/alpha!) (Delta^alpha A_j) D^(alpha) B_k``
    with ``alpha = N - j - k``.  Residuals ``r_N`` use ``B_0 + ... + B_N``.
    """
    require_rho_gt_delta(rho, delta)
    if not parts:
        raise EllipticityError("no symbol parts")
    full = parts[0]
    for p in parts[1:]:
        full = full + p
    rep_full = check_elliptic(model, full, mu)
    rep_0 = check_elliptic(model, parts[0], mu)
    if not (rep_full.passed and rep_0.passed):
        raise EllipticityError(f"symbol is not elliptic of order {mu} (tail margin "
                               f"{min(rep_full.tail_margin, rep_0.tail_margin):.3e})")
    n0 = max(rep_full.N0, rep_0.N0)
    ell = rep_full if rep_full.N0 >= rep_0.N0 else rep_0
    region = model.weights >= _weight_at(model, n0) * (1 - 1e-12)
    a0 = parts[0].filled()
    if np.any(np.abs(a0[:, region]) < np.finfo(float).tiny):
        raise EllipticityError("division underflow in the principal symbol")
    inv = np.zeros_like(a0)
    inv[:, region] = 1.0 / a0[:, region]

    step = rho - delta
    diffs = [delta_powers(model, p, n_max, fam, eps) for p in parts]
    B: list[Symbol] = [Symbol(inv, -mu, rho, delta, parts[0].mask)]
    for N in range(1, n_max + 1):
        acc = np.zeros_like(a0)
        for k in range(N):
            for j in range(min(N - k, len(parts) - 1) + 1):
                al = N - j - k
                dB = D_alpha_x(model, B[k], al, fam)
                acc = acc + diffs[j][al].filled() * dB.filled() / factorial(al)
        B.append(Symbol(-inv * acc, -mu - step * N, rho, delta, parts[0].mask))

    A_op = OperatorMatrix(kernel_of_symbol(model, full), model.w)
    AU = A_op.apply(model.U)
    band = reliable_band(model.weights)
    inband = (model.weights >= band[0]) & (model.weights <= band[1])
    G = model.gram_u()
    res, res_full, ratios = [], [], []
    partial = None
    for N, b in enumerate(B):
        partial = b if partial is None else partial + b
        R = model.U - OperatorMatrix(kernel_of_symbol(model, partial), model.w).apply(AU)
        H = R.conj().T @ (model.w[:, None] * R)
        res_full.append(_gen_norm(H, G))
        res.append(_gen_norm(H[np.ix_(inband, inband)], G[np.ix_(inband, inband)]))
        ratios.append(np.sqrt(np.real(np.diag(H)) / np.real(np.diag(G))))
    ratios = np.array(ratios)
    scale = float(ratios[0][inband].max()) if inband.any() else 1.0
    exps = np.array([fit_order(model, r, max(scale, 1.0), zero_floor, band).exponent for r in ratios])
    b_orders = np.array([fit_order(model, sup_profile(b), 1.0, 0.0, band).exponent for b in B])
    sigma_B = partial.with_table(partial.table, order=-mu)
    return ParametrixResult(B, sigma_B, np.array(res), np.array(res_full), ratios, exps,
                            b_orders, ell, band)


def _gen_norm(H: np.ndarray, G: np.ndarray) -> float:
    """``sqrt`` of the top eigenvalue of ``H c = s G c`` (norm on a spanned subspace)."""
    H = 0.5 * (H + H.conj().T)
    G = 0.5 * (G + G.conj().T)
    ev = eigh(H, G, eigvals_only=True)
    return float(np.sqrt(max(ev[-1], 0.0)))


# ── boundedness ─────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class L2BoundReport:
    norm: float
    derivative_sups: tuple[float, ...]
    C: float
    kappa: float
    kappa_bound: float
    passed: bool


def l2_boundedness_check(model: SpectralModel, a: Symbol, k_derivs: int = 1) -> L2BoundReport:
    """Operator norm of ``Op(a)`` against ``C = max_{beta<=k} sup |d_x^beta a|``.

    The recorded bound is ``kappa_bound = sqrt(lambda_max(G) / lambda_min(G))``
    of the Gram matrix of the ``u`` family, times ``k + 1``.
    """
    derivs = model.grid.derivatives(a.filled(), k_derivs, axis=0,
                                    valid=None if a.mask is None else ~a.mask)
    sups = tuple(float(np.max(np.abs(d))) for d in derivs)
    C = max(sups)
    norm = op_from_symbol(model, a).norm()
    lo, hi = frame_bounds(model)
    kb = (hi / lo) * (k_derivs + 1)
    kappa = norm / C if C > 0 else 0.0
    return L2BoundReport(norm, sups, C, kappa, kb, bool(np.isfinite(norm) and norm <= kb * C * (1 + 1e-10)))


@dataclass(frozen=True)
class RatioReport:
    """Largest ratio over a probe set and over the doubled probe set."""

    ratio: float
    ratio_doubled: float
    ratios: np.ndarray

    @property
    def relative_change(self) -> float:
        return abs(self.ratio_doubled - self.ratio) / self.ratio if self.ratio else 0.0

    def stable(self, tol: float) -> bool:
        return bool(np.isfinite(self.ratio) and self.relative_change <= tol)


def _probe_ratios(model, fn, probes, seed):
    c = probe_coefficients(model, 2 * probes, seed)
    F = model.U @ c
    vals = np.array([fn(F[:, p]) for p in range(F.shape[1])])
    return RatioReport(float(vals[:probes].max()), float(vals.max()), vals)


def _apply_symbol(model: SpectralModel, a: Symbol, f) -> np.ndarray:
    """``Op(a) f`` through coefficients."""
    fh = forward(model, f).values
    return (a.filled() * model.U) @ fh


def sobolev_boundedness_check(model: SpectralModel, a: Symbol, mu: float, s: float,
                              probes: int = 32, seed: int = 0, form: str = "l2L") -> RatioReport:
    """``sup ||Op(a) f||_{H^{s-mu}} / ||f||_{H^s}`` over band-limited probes."""
    def ratio(f):
        return sobolev_norm(model, _apply_symbol(model, a, f), s - mu, form) / sobolev_norm(model, f, s, form)

    return _probe_ratios(model, ratio, probes, seed)


@dataclass(frozen=True)
class AprioriReport:
    xi_max: tuple[int, ...]
    C: tuple[float, ...]
    relative_change: float
    passed: bool


def apriori_estimate_check(model: SpectralModel, factory: SymbolFactory, mu: float, s: float,
                           n_neg: float = 2.0, probes: int = 32, seed: int = 0,
                           xi_values: Sequence[int] = (32, 64), tol: float = 0.2,
                           form: str = "l2L") -> AprioriReport:
    """Fitted constant in ``||u||_{s+mu} <= C (||Au||_s + ||u||_{-n_neg})`` per truncation."""
    Cs = []
    for xi in xi_values:
        m = model if xi == model.xi_max else with_truncation(model, xi)
        a = factory(m)
        c = probe_coefficients(m, probes, seed)
        F = m.U @ c
        vals = []
        for p in range(probes):
            u = F[:, p]
            lhs = sobolev_norm(m, u, s + mu, form)
            rhs = sobolev_norm(m, _apply_symbol(m, a, u), s, form) + sobolev_norm(m, u, -n_neg, form)
            vals.append(lhs / rhs)
        Cs.append(float(max(vals)))
    change = abs(Cs[-1] - Cs[0]) / Cs[0]
    return AprioriReport(tuple(int(x) for x in xi_values), tuple(Cs), change,
                         bool(np.all(np.isfinite(Cs)) and change <= tol))


# ── kernel decay ────────────────────────────────────────────────────────────


def smooth_taper(t) -> np.ndarray:
    """``C^inf`` cutoff: 1 on ``|t| <= 1/2``, 0 on ``|t| >= 1``."""
    t = np.abs(np.asarray(t, dtype=float))
    s = np.clip(2.0 * (1.0 - t), 0.0, 1.0)  # 0 at |t|=1, 1 at |t|=1/2

    def psi(z):
        return np.where(z > 0, np.exp(-1.0 / np.where(z > 0, z, 1.0)), 0.0)

    return psi(s) / (psi(s) + psi(1.0 - s))


def tapered(model: SpectralModel, a: Symbol) -> Symbol:
    scale = float(np.abs(model.indices).max())
    chi = smooth_taper(model.indices / scale)
    return a.with_table(a.table * chi[None, :])


@dataclass(frozen=True)
class KernelDecayReport:
    threshold: float
    alphas: tuple[int, ...]
    xi_max: tuple[int, int]
    sups: np.ndarray                  # [truncation, alpha]
    growth: np.ndarray                # sup ratio 2 Xi / Xi per alpha
    N: int
    offdiag_sups: tuple[float, float]  # sup |q|^N |K| per truncation
    singularity_exponent: float       # p in |K| ~ |q|^{-p}, from sup|K| ~ Xi^p
    profile_fit: FitResult            # direct fit of the binned profile (soft; taper ripple)
    growth_limit: float

    def stable(self, alpha: int) -> bool:
        return bool(self.growth[self.alphas.index(alpha)] < self.growth_limit)

    @property
    def offdiag_growth(self) -> float:
        return self.offdiag_sups[1] / self.offdiag_sups[0]


def _kernel_k(model: SpectralModel, a: Symbol, k: int) -> np.ndarray:
    K = kernel_of_symbol(model, tapered(model, a))
    for _ in range(k):
        K = model.apply_Lstar(K, axis=1)
    return K


def kernel_decay_report(model: SpectralModel, factory: SymbolFactory, fam: DifferenceFamily,
                        mu: float, k: int = 0, alphas: Sequence[int] = (0, 1, 2, 3, 4),
                        rho: float = 1.0, mu0: float | None = None, N: int = 4,
                        growth_limit: float = 2.0, stride: int = 2) -> KernelDecayReport:
    """Sup norms of ``q^alpha (L*_y)^k K`` at ``Xi`` and ``2 Xi`` plus the off-diagonal profile.

    The symbol is multiplied by a smooth cutoff in ``xi`` so the truncated family
    stays uniformly in its class.  The threshold is
    ``(mu + m k + 2 mu0 + s0) / rho``.
    """
    from .spectral_model import estimate_mu0

    alphas = tuple(int(a) for a in alphas)

    mu0 = max(estimate_mu0(model).mu0, 0.0) if mu0 is None else mu0
    thr = (mu + model.m * k + 2 * mu0 + model.s0) / rho
    models = (model, with_truncation(model, 2 * model.xi_max))
    # |q| measures distance to the diagonal in the geometry the family sees
    # (periodic kernels are also singular near the corners x ~ 0, y ~ 1)
    Q = fam.matrix[::stride, ::stride]
    dist = np.abs(Q)
    sups = np.zeros((2, len(alphas)))
    off = []
    profiles = []
    for t, m in enumerate(models):
        K = _kernel_k(m, factory(m), k)[::stride, ::stride]
        for i, al in enumerate(alphas):
            sups[t, i] = float(np.max(np.abs(Q**al * K)))
        off.append(float(np.max(dist**N * np.abs(K))))
        profiles.append(np.abs(K))
    # binned off-diagonal profile of the finer truncation (soft: taper ripple)
    Kf = profiles[1]
    xi2 = 2 * model.xi_max
    edges = np.geomspace(4.0 / xi2, 0.5, 16)
    ts, ps = [], []
    for e0, e1 in zip(edges, edges[1:]):
        sel = (dist >= e0) & (dist < e1)
        if sel.any():
            ts.append(np.sqrt(e0 * e1))
            ps.append(float(Kf[sel].max()))
    fit = loglog_fit(ts, ps)
    growth = sups[1] / sups[0]
    p = float(np.log2(growth[alphas.index(0)])) if 0 in alphas else float("nan")
    return KernelDecayReport(thr, tuple(alphas), (model.xi_max, xi2), sups, growth, N,
                             (off[0], off[1]), p, fit, growth_limit)


# ── singular support ────────────────────────────────────────────────────────


@dataclass(frozen=True)
class SingularSupportReport:
    centers: np.ndarray
    indicators: dict
    peaks: dict
    cell: float


def tail_indicator(x: np.ndarray, w: np.ndarray, f: np.ndarray, centers: np.ndarray,
                   width: float, freqs: np.ndarray) -> np.ndarray:
    """Relative energy of the windowed function ``phi_c f`` at frequencies ``freqs``."""
    E = np.exp(-2j * np.pi * np.outer(freqs, x)) * w[None, :]
    out = np.empty(centers.size)
    for i, c in enumerate(centers):
        g = np.exp(-(((x - c) / width) ** 2)) * f
        tail = np.sum(np.abs(E @ g) ** 2)
        tot = np.sum(w * np.abs(g) ** 2)
        out[i] = tail / tot if tot > 0 else 0.0
    return out


def singular_support_demo(model: SpectralModel, a: Symbol, b: Symbol, kink: float = 0.5,
                          width: float = 0.05, span: tuple[float, float] = (0.25, 0.75)) -> SingularSupportReport:
    """Localized high-frequency energy of ``w = |x - kink|``, ``A w`` and ``B A w``."""
    x = model.x
    w_in = np.abs(x - kink) + 0j
    w_band = model.U @ forward(model, w_in).values
    Aw = _apply_symbol(model, a, w_band)
    BAw = _apply_symbol(model, b, Aw)
    smooth = model.U @ forward(model, np.exp(np.sin(2 * np.pi * x))).values
    centers = x[(x >= span[0]) & (x <= span[1])]
    xi = model.xi_max
    freqs = np.arange(xi // 2, xi + 1)
    freqs = np.concatenate([-freqs[::-1], freqs])
    inds, peaks = {}, {}
    for name, f in (("w", w_band), ("Aw", Aw), ("BAw", BAw), ("smooth", smooth)):
        ind = tail_indicator(x, model.w, f, centers, width, freqs)
        inds[name] = ind
        peaks[name] = float(centers[int(np.argmax(ind))])
    cell = float(np.max(np.diff(x[(x >= kink - 0.05) & (x <= kink + 0.05)])))
    return SingularSupportReport(centers, inds, peaks, cell)


# ── embedding ───────────────────────────────────────────────────────────────


def sobolev_embedding_check(model: SpectralModel, k: int = 1, kappa: float = 1.0,
                            probes: int = 32, seed: int = 0, form: str = "l2L") -> RatioReport:
    """``sup ||f||_{C} / ||f||_{H^{kappa k}}`` over band-limited probes."""
    s = kappa * k

    def ratio(f):
        return float(np.max(np.abs(f))) / sobolev_norm(model, f, s, form)

    return _probe_ratios(model, ratio, probes, seed)
