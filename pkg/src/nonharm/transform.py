"""Coefficient transforms built on a biorthogonal pair of eigenfunction families.

``forward`` analyses against ``v_xi`` and synthesizes with ``u_xi``; ``forward_star``
swaps the roles.  Coefficient vectors carry their flavor so the two are never mixed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .spectral_model import SpectralModel, probe_coefficients

log = logging.getLogger(__name__)

PLAIN, STAR = "plain", "star"


class TransformError(ValueError):
    """Grid mismatch, flavor mismatch or invalid exponent."""


@dataclass(frozen=True, eq=False)
class CoefficientVector:
    values: np.ndarray
    flavor: str = PLAIN

    def __post_init__(self):
        if self.flavor not in (PLAIN, STAR):
            raise TransformError(f"unknown flavor {self.flavor!r}")
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))

    def __add__(self, other: "CoefficientVector") -> "CoefficientVector":
        _same_flavor(self, other)
        return CoefficientVector(self.values + other.values, self.flavor)

    def scaled(self, factor) -> "CoefficientVector":
        return CoefficientVector(self.values * factor, self.flavor)


def _same_flavor(a: CoefficientVector, b: CoefficientVector) -> None:
    if a.flavor != b.flavor:
        raise TransformError(f"flavor mismatch: {a.flavor} vs {b.flavor}")


def _grid_function(model: SpectralModel, f) -> np.ndarray:
    f = np.asarray(f)
    if f.shape[0] != model.grid.count:
        raise TransformError(f"grid mismatch: {f.shape[0]} samples for {model.grid.count} nodes")
    return f


def _coeffs(model: SpectralModel, a: CoefficientVector, flavor: str) -> np.ndarray:
    if not isinstance(a, CoefficientVector):
        raise TransformError("expected a CoefficientVector")
    if a.flavor != flavor:
        raise TransformError(f"expected {flavor} coefficients, got {a.flavor}")
    if a.values.shape[0] != model.size:
        raise TransformError("coefficient length does not match the index set")
    return a.values


# ── transforms ──────────────────────────────────────────────────────────────


def forward(model: SpectralModel, f) -> CoefficientVector:
    """``f^(xi) = int f conj(v_xi)``; accepts a sample vector or a stack of columns."""
    f = _grid_function(model, f)
    w = model.w if f.ndim == 1 else model.w[:, None]
    return CoefficientVector(model.V.conj().T @ (w * f), PLAIN)


def forward_star(model: SpectralModel, f) -> CoefficientVector:
    """``f^_*(xi) = int f conj(u_xi)``."""
    f = _grid_function(model, f)
    w = model.w if f.ndim == 1 else model.w[:, None]
    return CoefficientVector(model.U.conj().T @ (w * f), STAR)


def inverse(model: SpectralModel, a: CoefficientVector) -> np.ndarray:
    return model.U @ _coeffs(model, a, PLAIN)


def inverse_star(model: SpectralModel, a: CoefficientVector) -> np.ndarray:
    return model.V @ _coeffs(model, a, STAR)


# ── inner products and norms ────────────────────────────────────────────────


def inner_l2L(model: SpectralModel, a: CoefficientVector, b: CoefficientVector) -> complex:
    """Inner product of the weighted sequence space attached to the flavor.

    Plain vectors: ``sum a(xi) conj((F_{L*} F_L^{-1} b)(xi))``; star vectors use the
    mirrored map ``F_L F_{L*}^{-1}``.
    """
    _same_flavor(a, b)
    if a.flavor == PLAIN:
        bv = _coeffs(model, b, PLAIN)
        mapped = model.U.conj().T @ (model.w * (model.U @ bv))
        return complex(np.sum(_coeffs(model, a, PLAIN) * np.conj(mapped)))
    bv = _coeffs(model, b, STAR)
    mapped = model.V.conj().T @ (model.w * (model.V @ bv))
    return complex(np.sum(_coeffs(model, a, STAR) * np.conj(mapped)))


def norm_l2L(model: SpectralModel, a: CoefficientVector) -> float:
    val = inner_l2L(model, a, a)
    return float(np.sqrt(max(val.real, 0.0)))


def plancherel_pairing(model: SpectralModel, fhat: CoefficientVector, fhat_star: CoefficientVector) -> complex:
    """``sum f^(xi) conj(g^_*(xi))``, the pairing that realizes ``(f, g)`` in coefficients."""
    return complex(np.sum(_coeffs(model, fhat, PLAIN) * np.conj(_coeffs(model, fhat_star, STAR))))


@dataclass(frozen=True)
class ParsevalReport:
    lhs: complex
    rhs: complex
    mismatch: float
    norm_l2: float
    norm_plain: float
    norm_star: float
    norm_star_truncated: float

    @property
    def norm_spread(self) -> float:
        n = (self.norm_l2, self.norm_plain, self.norm_star)
        return max(n) - min(n)


def parseval_check(model: SpectralModel, f, g) -> ParsevalReport:
    """Compare ``(f, g)`` with ``sum f^ conj(g^_*)`` and the three norms of ``f``.

    ``f`` must lie in the span of the truncated ``u`` family.  The star-side norm
    is taken through the pairing ``sum f^_* conj(f^)``; ``norm_star_truncated``
    applies the definition with the truncated map ``F_L F_{L*}^{-1}``, which leaks
    whenever ``f^_*`` is not band-limited (non-self-adjoint models) and is
    reported for information only.
    """
    f = _grid_function(model, f)
    g = _grid_function(model, g)
    lhs = model.grid.inner(f, g)
    fh, fs = forward(model, f), forward_star(model, f)
    gs = forward_star(model, g)
    rhs = plancherel_pairing(model, fh, gs)
    n2 = float(np.sqrt(model.grid.inner(f, f).real))
    n_plain = norm_l2L(model, fh)
    star_pair = plancherel_pairing(model, fh, fs)
    n_star = float(np.sqrt(max(star_pair.real, 0.0)))
    n_star_trunc = norm_l2L(model, fs)
    return ParsevalReport(lhs, rhs, abs(lhs - rhs), n2, n_plain, n_star, n_star_trunc)


def lp_norm(model: SpectralModel, a: CoefficientVector, p: float) -> float:
    """Weighted ``l^p`` norm of a coefficient vector.

    Plain flavor weights ``|a|^p`` by ``sup|u_xi|^{2-p}`` for ``p <= 2`` and by
    ``sup|v_xi|^{2-p}`` for ``p >= 2``; ``p = inf`` is ``sup |a| / sup|v_xi|``.
    The star flavor exchanges ``u`` and ``v``.
    """
    if not p >= 1:
        raise TransformError(f"p must be >= 1, got {p}")
    vals = np.abs(a.values)
    low, high = (model.sup_u, model.sup_v) if a.flavor == PLAIN else (model.sup_v, model.sup_u)
    if np.isinf(p):
        return float(np.max(vals / high))
    wts = low if p <= 2 else high
    return float(np.sum(vals**p * wts ** (2.0 - p)) ** (1.0 / p))


def lp_function_norm(model: SpectralModel, f, p: float) -> float:
    return float(model.grid.norm(f, p))


# ── Hausdorff-Young ─────────────────────────────────────────────────────────


def probe_functions(model: SpectralModel, count: int, seed: int, decay: float = 2.0) -> np.ndarray:
    """Band-limited random functions ``sum c_xi u_xi`` as columns."""
    return model.U @ probe_coefficients(model, count, seed, decay)


@dataclass(frozen=True)
class HausdorffYoungReport:
    p: float
    constant: float
    constant_doubled: float
    ratios: np.ndarray

    @property
    def relative_change(self) -> float:
        return abs(self.constant_doubled - self.constant) / self.constant

    def stable(self, tol: float = 0.05) -> bool:
        return bool(np.isfinite(self.constant) and self.relative_change <= tol)


def _hy_ratios(model: SpectralModel, f: np.ndarray, p: float) -> np.ndarray:
    q = np.inf if p == 1 else p / (p - 1.0)
    coeffs = forward(model, f).values
    out = np.empty(f.shape[1])
    for j in range(f.shape[1]):
        num = lp_norm(model, CoefficientVector(coeffs[:, j], PLAIN), q)
        out[j] = num / lp_function_norm(model, f[:, j], p)
    return out


def hausdorff_young_check(model: SpectralModel, p: float, probe_count: int = 32,
                          seed: int = 0) -> HausdorffYoungReport:
    """Largest ``||f^||_{l^{p'}} / ||f||_{L^p}`` over a probe set.

    The probe set holds every truncated eigenfunction ``u_eta`` plus
    ``probe_count`` random band-limited functions; the measurement is repeated
    with twice as many random probes to judge stability.
    """
    if not 1 <= p <= 2:
        raise TransformError("Hausdorff-Young check needs 1 <= p <= 2")
    if probe_count < 1:
        raise TransformError("probe set is empty")
    base = _hy_ratios(model, np.asarray(model.U), p)
    r1 = _hy_ratios(model, probe_functions(model, probe_count, seed), p)
    r2 = _hy_ratios(model, probe_functions(model, 2 * probe_count, seed), p)
    c1 = float(max(base.max(), r1.max()))
    c2 = float(max(base.max(), r2.max()))
    return HausdorffYoungReport(float(p), c1, c2, np.concatenate([base, r1]))


# ── Sobolev norms ───────────────────────────────────────────────────────────


class SobolevDegeneracyError(ArithmeticError):
    """Negative squared Sobolev norm beyond tolerance."""


def sobolev_norm(model: SpectralModel, f, s: float, form: str = "pairing",
                 imag_tol: float = 1e-10) -> float:
    """Sobolev norm of order ``s`` attached to the model.

    Parameters
    ----------
    form : {"pairing", "l2L"}
        ``"pairing"`` evaluates ``(sum <xi>^{2s} f^ conj(f^_*))^{1/2}``.  For
        non-self-adjoint models this sum is in general not real, because the Gram
        matrix of the ``u`` family does not commute with the weights; the
        imaginary part is then dropped with a warning.  ``"l2L"`` evaluates the
        weighted-sequence norm ``|| sum <xi>^s f^(xi) u_xi ||``, which is always a
        norm and coincides with the pairing form on self-adjoint models.
    """
    f = _grid_function(model, f)
    fh = forward(model, f).values
    wts = model.weights ** s
    if form == "l2L":
        g = model.U @ (wts * fh)
        return float(np.sqrt(model.grid.inner(g, g).real))
    if form != "pairing":
        raise TransformError(f"unknown Sobolev form {form!r}")
    fs = forward_star(model, f).values
    total = np.sum(wts**2 * fh * np.conj(fs))
    scale = max(1.0, float(np.sum(wts**2 * np.abs(fh) * np.abs(fs))))
    if abs(total.imag) > imag_tol * scale:
        log.warning("Sobolev pairing has imaginary part %.3e (relative %.3e); discarded",
                    total.imag, abs(total.imag) / scale)
    if total.real < -imag_tol * scale:
        raise SobolevDegeneracyError(f"negative squared Sobolev norm {total.real!r}")
    return float(np.sqrt(max(total.real, 0.0)))


def sobolev_pairing(model: SpectralModel, f, s: float) -> complex:
    """The raw (possibly complex) pairing sum behind ``sobolev_norm(form='pairing')``."""
    f = _grid_function(model, f)
    wts = model.weights ** (2 * s)
    return complex(np.sum(wts * forward(model, f).values * np.conj(forward_star(model, f).values)))
