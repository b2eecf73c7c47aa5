"""Model operators on (0, 1): quadrature grids, eigenpairs and biorthogonal samples.

Three models are provided.

``h-model``
    ``L = -i d/dx`` with the twisted condition ``f(1) = h f(0)``.  Eigenvalues
    ``2 pi j - i ln h``; eigenfunctions ``h^x e^{2 pi i j x}`` and, for the adjoint,
    ``h^{-x} e^{2 pi i j x}``.  Non-self-adjoint unless ``h = 1``.
``periodic``
    ``L = -i d/dx`` with periodic conditions, ``u = v = e^{2 pi i xi x}``.
``dirichlet``
    ``L = -d^2/dx^2`` with zero boundary values, ``u = v = sqrt(2) sin(pi j x)``.
    The eigenfunctions vanish inside the interval for ``j >= 2``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache

import numpy as np
from numpy.polynomial import legendre as npleg
from scipy.special import roots_legendre

from .report import Check

log = logging.getLogger(__name__)

_EPS = np.finfo(float).eps


class ModelError(ValueError):
    """Invalid model request (bad parameter or unresolvable grid)."""


# ── quadrature ──────────────────────────────────────────────────────────────


def _legendre_and_derivative(n: int, t: np.ndarray):
    p0 = np.ones_like(t)
    p1 = t.copy()
    for k in range(1, n):
        p0, p1 = p1, ((2 * k + 1) * t * p1 - k * p0) / (k + 1)
    dp = n * (t * p1 - p0) / (t * t - 1.0)
    return p1, dp


@lru_cache(maxsize=16)
def _gauss_legendre_raw(n: int) -> tuple[np.ndarray, np.ndarray]:
    # scipy's large-n weights are only good to ~1e-7 relative; two Newton steps on
    # the nodes followed by w = 2 / ((1 - t^2) P_n'(t)^2) restore full accuracy.
    t, _ = roots_legendre(n)
    for _ in range(2):
        p, dp = _legendre_and_derivative(n, t)
        t = t - p / dp
    _, dp = _legendre_and_derivative(n, t)
    w = 2.0 / ((1.0 - t * t) * dp * dp)
    return t, w


@dataclass(frozen=True, eq=False)
class Grid:
    """Quadrature grid on (0, 1).

    Parameters
    ----------
    nodes, weights : ndarray
        Points strictly inside (0, 1) and positive weights summing to one.
    kind : {"gauss-legendre", "trapezoid"}
        Determines how derivatives are taken: Legendre series for
        Gauss-Legendre grids, FFT for the uniform periodic grid.
    max_degree : int
        Cap on the Legendre degree used by :meth:`derivatives`.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str = "gauss-legendre"
    max_degree: int = 768

    def __post_init__(self):
        x = np.asarray(self.nodes, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        if x.ndim != 1 or x.shape != w.shape or x.size < 2:
            raise ModelError("nodes and weights must be 1-D arrays of equal length")
        if not (np.all(np.diff(x) > 0) and x[0] > 0 and x[-1] < 1):
            raise ModelError("nodes must be strictly increasing inside (0, 1)")
        if not np.all(w > 0):
            raise ModelError("weights must be positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ModelError(f"weights sum to {w.sum()!r}, expected 1")
        x.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "weights", w)

    @property
    def count(self) -> int:
        return self.nodes.size

    @property
    def spacing(self) -> float:
        return float(np.max(np.diff(self.nodes)))

    def integrate(self, f, axis: int = 0):
        f = np.moveaxis(np.asarray(f), axis, 0)
        return np.tensordot(self.weights, f, axes=(0, 0))

    def inner(self, f, g) -> complex:
        """L2 inner product ``(f, g) = int f conj(g)``."""
        return complex(np.sum(self.weights * f * np.conj(g)))

    def norm(self, f, p: float = 2.0, axis: int = 0):
        f = np.abs(np.moveaxis(np.asarray(f), axis, 0))
        if np.isinf(p):
            return f.max(axis=0)
        return np.tensordot(self.weights, f**p, axes=(0, 0)) ** (1.0 / p)

    # -- spectral differentiation --------------------------------------------

    @cached_property
    def _legendre(self):
        deg = min(self.count - 1, self.max_degree)
        t = 2.0 * self.nodes - 1.0
        P = npleg.legvander(t, deg)
        analysis = (P * self.weights[:, None]).T * (2.0 * np.arange(deg + 1) + 1.0)[:, None]
        return P, analysis

    def _legendre_coeffs(self, f2: np.ndarray, valid: np.ndarray | None) -> np.ndarray:
        P, analysis = self._legendre
        c = analysis @ f2
        if valid is not None:
            bad_cols = np.nonzero(~valid.all(axis=0))[0]
            if bad_cols.size:
                d = min(P.shape[1], 400)
                sw = np.sqrt(self.weights)
                for j in bad_cols:
                    rows = valid[:, j]
                    sol, *_ = np.linalg.lstsq(P[rows, :d] * sw[rows, None],
                                              f2[rows, j] * sw[rows], rcond=None)
                    c[:, j] = 0.0
                    c[:d, j] = sol
        # drop the quadrature-noise plateau; noise on c_k scales like (2k+1) eps
        k = np.arange(c.shape[0])
        mag = np.abs(c)
        thr = 8.0 * _EPS * (2 * k + 1)[:, None] * mag.max(axis=0, keepdims=True)
        keep = mag > thr
        last = np.where(keep.any(axis=0), c.shape[0] - 1 - np.argmax(keep[::-1], axis=0), -1)
        if np.any(last >= c.shape[0] - 3):
            log.warning("Legendre series not resolved at degree %d; derivatives may be inaccurate",
                        c.shape[0] - 1)
        c[k[:, None] > last[None, :]] = 0.0
        return c

    def derivatives(self, f, max_order: int, axis: int = 0, valid=None) -> list[np.ndarray]:
        """Return ``[f, f', ..., f^(max_order)]`` sampled on the grid.

        ``valid`` (boolean, same shape as ``f``) excludes samples from the fit; the
        series for such columns is obtained by weighted least squares.
        """
        f = np.asarray(f)
        moved = np.moveaxis(f, axis, 0)
        shape = moved.shape
        f2 = moved.reshape(shape[0], -1)
        if valid is not None:
            valid = np.moveaxis(np.asarray(valid, bool), axis, 0).reshape(shape[0], -1)
        if self.kind == "trapezoid":
            out = self._fft_derivatives(f2, max_order)
        else:
            P, _ = self._legendre
            c = self._legendre_coeffs(f2.astype(complex if np.iscomplexobj(f2) else float), valid)
            out = []
            for order in range(max_order + 1):
                dc = npleg.legder(c, m=order, scl=2.0, axis=0) if order else c
                out.append(P[:, : dc.shape[0]] @ dc)
        if not np.iscomplexobj(f):
            out = [o.real if np.iscomplexobj(o) else o for o in out]
        return [np.moveaxis(o.reshape(shape), 0, axis) for o in out]

    def derivative(self, f, order: int = 1, axis: int = 0, valid=None) -> np.ndarray:
        return self.derivatives(f, order, axis=axis, valid=valid)[order]

    def _fft_derivatives(self, f2, max_order):
        n = self.count
        F = np.fft.fft(f2, axis=0)
        k = np.fft.fftfreq(n, d=1.0 / n)
        out = [f2.astype(complex)]
        for order in range(1, max_order + 1):
            mult = (2j * np.pi * k) ** order
            if n % 2 == 0 and order % 2 == 1:
                mult[n // 2] = 0.0
            out.append(np.fft.ifft(F * mult[:, None], axis=0))
        if not np.iscomplexobj(f2):
            out = [o.real for o in out]
        return out


def gauss_legendre_grid(n: int = 2048, max_degree: int = 768) -> Grid:
    """Gauss-Legendre rule mapped to (0, 1)."""
    if n < 2:
        raise ModelError("need at least two nodes")
    t, w = _gauss_legendre_raw(int(n))
    return Grid((t + 1.0) / 2.0, w / w.sum(), "gauss-legendre", max_degree)


def trapezoid_grid(n: int) -> Grid:
    """Uniform (midpoint-shifted) periodic trapezoid rule on (0, 1)."""
    x = (np.arange(n) + 0.5) / n
    return Grid(x, np.full(n, 1.0 / n), "trapezoid")


# ── models ──────────────────────────────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class SpectralModel:
    """Eigenvalues and sampled biorthogonal eigenfunctions of a model operator.

    ``U[:, k]`` and ``V[:, k]`` hold ``u_xi`` and ``v_xi`` for ``xi = indices[k]``.
    ``V`` is scaled so that ``int u_xi conj(v_xi) = 1`` exactly on the grid.
    """

    model_id: str
    grid: Grid
    indices: np.ndarray
    eigenvalues: np.ndarray
    U: np.ndarray
    V: np.ndarray
    m: float
    h: float | None = None
    s0: float = 2.0
    mu0_estimate: float = 0.0
    v_norm_deviation: float = 0.0
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("indices", "eigenvalues", "U", "V"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        n = self.indices.size
        if self.U.shape != (self.grid.count, n) or self.V.shape != self.U.shape:
            raise ModelError("eigenfunction tables do not match grid x index set")

    # -- basic accessors ------------------------------------------------------

    @property
    def size(self) -> int:
        return self.indices.size

    @property
    def xi_max(self) -> int:
        return int(np.abs(self.indices).max())

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def w(self) -> np.ndarray:
        return self.grid.weights

    @property
    def self_adjoint(self) -> bool:
        return self.model_id != "h-model" or abs(np.log(self.h)) == 0.0

    @cached_property
    def weights(self) -> np.ndarray:
        """The frequency weight ``<xi> = (1 + |lambda_xi|^2)^{1/(2m)}``."""
        return (1.0 + np.abs(self.eigenvalues) ** 2) ** (1.0 / (2.0 * self.m))

    @cached_property
    def sup_u(self) -> np.ndarray:
        return np.abs(self.U).max(axis=0)

    @cached_property
    def sup_v(self) -> np.ndarray:
        return np.abs(self.V).max(axis=0)

    def position(self, xi: int) -> int:
        hits = np.nonzero(self.indices == xi)[0]
        if hits.size == 0:
            raise KeyError(f"index {xi} is not in the truncated set")
        return int(hits[0])

    def gram(self) -> np.ndarray:
        """``G[a, b] = int u_a conj(v_b)`` by quadrature."""
        return self.V.conj().T @ (self.w[:, None] * self.U)

    def gram_u(self) -> np.ndarray:
        """Gram matrix of the synthesis family, ``G[a, b] = (u_b, u_a)``."""
        return self.U.conj().T @ (self.w[:, None] * self.U)

    # -- differential action ----------------------------------------------------

    def apply_L(self, f, axis: int = 0) -> np.ndarray:
        """Apply the formal differential expression of L along ``axis``."""
        if self.model_id == "dirichlet":
            return -self.grid.derivative(f, 2, axis=axis)
        return -1j * self.grid.derivative(f, 1, axis=axis)

    def apply_Lstar(self, f, axis: int = 0) -> np.ndarray:
        """Formal adjoint expression; both differential models are formally symmetric."""
        return self.apply_L(f, axis=axis)

    def eigen_residuals(self) -> np.ndarray:
        r = self.apply_L(self.U) - self.U * self.eigenvalues[None, :]
        return np.sqrt(self.grid.integrate(np.abs(r) ** 2))

    def conj_eigen_residuals(self) -> np.ndarray:
        r = self.apply_Lstar(self.V) - self.V * np.conj(self.eigenvalues)[None, :]
        return np.sqrt(self.grid.integrate(np.abs(r) ** 2))


def _default_grid(grid: Grid | None, nodes: int) -> Grid:
    return grid if grid is not None else gauss_legendre_grid(nodes)


def _guard(xi_max: int, grid: Grid) -> None:
    if xi_max < 1:
        raise ModelError("xi_max must be at least 1")
    if grid.count < 4 * xi_max:
        raise ModelError(
            f"grid too coarse: {grid.count} nodes for xi_max={xi_max} (need >= {4 * xi_max})")


def _symmetric_indices(xi_max: int) -> np.ndarray:
    return np.arange(-xi_max, xi_max + 1)


def _normalize_pair(grid: Grid, U: np.ndarray, V: np.ndarray):
    w = grid.weights[:, None]
    U = U / np.sqrt(np.sum(w * np.abs(U) ** 2, axis=0))
    V = V / np.sqrt(np.sum(w * np.abs(V) ** 2, axis=0))
    diag = np.sum(w * U * np.conj(V), axis=0)
    V = V / np.conj(diag)
    dev = float(np.max(np.abs(np.sqrt(np.sum(w * np.abs(V) ** 2, axis=0)) - 1.0)))
    return U, V, dev


def _finish(model: SpectralModel) -> SpectralModel:
    mu0 = estimate_mu0(model).mu0 if model.size > 1 and np.ptp(model.weights) > 0 else 0.0
    object.__setattr__(model, "mu0_estimate", mu0)
    return model


def build_h_model(h: float, xi_max: int, grid: Grid | None = None, *, nodes: int = 2048,
                  m: float | None = None, s0: float | None = None) -> SpectralModel:
    """``L = -i d/dx`` on (0, 1) with ``f(1) = h f(0)``.

    Parameters
    ----------
    h : float
        Positive twist; ``h = 1`` recovers the periodic model.
    xi_max : int
        Truncation ``|j| <= xi_max``.
    """
    if not (np.isfinite(h) and h > 0):
        raise ModelError(f"h must be positive, got {h}")
    grid = _default_grid(grid, nodes)
    _guard(xi_max, grid)
    idx = _symmetric_indices(xi_max)
    lnh = float(np.log(h))
    lam = 2 * np.pi * idx - 1j * lnh
    x = grid.nodes[:, None]
    phase = 2j * np.pi * idx[None, :] * x
    U = np.exp(lnh * x + phase)
    V = np.exp(-lnh * x + phase)
    U, V, dev = _normalize_pair(grid, U, V)
    model = SpectralModel("h-model", grid, idx, lam, U, V, float(m or 1.0), float(h),
                          float(s0 or 2.0), v_norm_deviation=dev)
    return _finish(model)


def build_periodic_model(xi_max: int, grid: Grid | None = None, *, nodes: int = 2048,
                         m: float | None = None, s0: float | None = None) -> SpectralModel:
    """``L = -i d/dx`` with periodic conditions."""
    grid = _default_grid(grid, nodes)
    _guard(xi_max, grid)
    idx = _symmetric_indices(xi_max)
    lam = (2 * np.pi * idx).astype(complex)
    U = np.exp(2j * np.pi * grid.nodes[:, None] * idx[None, :])
    U, V, dev = _normalize_pair(grid, U, U.copy())
    model = SpectralModel("periodic", grid, idx, lam, U, V, float(m or 1.0), 1.0,
                          float(s0 or 2.0), v_norm_deviation=dev)
    return _finish(model)


def build_dirichlet_model(xi_max: int, grid: Grid | None = None, *, nodes: int = 2048,
                          m: float | None = None, s0: float | None = None) -> SpectralModel:
    """``L = -d^2/dx^2`` with Dirichlet conditions; indices ``j = 1..xi_max``."""
    grid = _default_grid(grid, nodes)
    _guard(xi_max, grid)
    idx = np.arange(1, xi_max + 1)
    lam = (np.pi * idx) ** 2 + 0j
    U = np.sqrt(2.0) * np.sin(np.pi * grid.nodes[:, None] * idx[None, :]) + 0j
    U, V, dev = _normalize_pair(grid, U, U.copy())
    model = SpectralModel("dirichlet", grid, idx, lam, U, V, float(m or 2.0), None,
                          float(s0 or 2.0), v_norm_deviation=dev)
    return _finish(model)


def build_model(model: str, xi_max: int, *, h: float = 1.0, nodes: int = 2048,
                quadrature: str = "gauss-legendre", m=None, s0=None) -> SpectralModel:
    """Dispatch on ``model`` id; used by configs and scripts."""
    if quadrature == "trapezoid":
        if model != "periodic":
            raise ModelError("trapezoid quadrature is only offered for the periodic model")
        grid = trapezoid_grid(nodes)
    else:
        grid = gauss_legendre_grid(nodes)
    if model == "h-model":
        return build_h_model(h, xi_max, grid, m=m, s0=s0)
    if model == "periodic":
        return build_periodic_model(xi_max, grid, m=m, s0=s0)
    if model == "dirichlet":
        return build_dirichlet_model(xi_max, grid, m=m, s0=s0)
    raise ModelError(f"unknown model {model!r}")


def with_truncation(model: SpectralModel, xi_max: int) -> SpectralModel:
    """Rebuild the same model on the same grid with a different truncation."""
    builder = {"h-model": lambda: build_h_model(model.h, xi_max, model.grid, m=model.m, s0=model.s0),
               "periodic": lambda: build_periodic_model(xi_max, model.grid, m=model.m, s0=model.s0),
               "dirichlet": lambda: build_dirichlet_model(xi_max, model.grid, m=model.m, s0=model.s0)}
    return builder[model.model_id]()


# ── weights and growth parameters ───────────────────────────────────────────


@dataclass(frozen=True, eq=False)
class WeightTable:
    indices: np.ndarray
    values: np.ndarray

    def ordered(self, eigenvalues: np.ndarray) -> bool:
        """Nondecreasing in |lambda| (ties allowed)."""
        order = np.argsort(np.abs(eigenvalues), kind="stable")
        return bool(np.all(np.diff(self.values[order]) >= -1e-12 * self.values.max()))


def weight_table(model: SpectralModel) -> WeightTable:
    vals = model.weights.copy()
    return WeightTable(model.indices.copy(), vals)


def index_ordering_ok(model: SpectralModel, rtol: float = 1e-12) -> bool:
    """``|lambda_j| <= |lambda_k|`` whenever ``|j| <= |k|``."""
    a = np.abs(model.indices)
    lam = np.abs(model.eigenvalues)
    scale = rtol * max(1.0, lam.max())
    levels = np.unique(a)
    hi = np.array([lam[a == s].max() for s in levels])
    lo = np.array([lam[a == s].min() for s in levels])
    same_level = np.all(hi - lo <= scale)
    return bool(same_level and np.all(lo[1:] >= hi[:-1] - scale))


@dataclass(frozen=True)
class Mu0Estimate:
    mu0: float
    C: float
    slope: float


def estimate_mu0(model: SpectralModel) -> Mu0Estimate:
    """Growth exponent of ``sup|u_xi|`` in ``<xi>``, floored at zero."""
    wts = model.weights
    if np.ptp(wts) <= 0:
        raise ModelError("degenerate fit: all weights are equal")
    A = np.vstack([np.log(wts), np.ones_like(wts)]).T
    slope = float(np.linalg.lstsq(A, np.log(model.sup_u), rcond=None)[0][0])
    mu0 = max(slope, 0.0)
    C = float(np.max(model.sup_u / wts**mu0))
    return Mu0Estimate(mu0, C, slope)


@dataclass(frozen=True)
class S0Report:
    s0: float
    shells: np.ndarray
    partial_sums: np.ndarray
    tail_slope: float
    verdict: str

    @property
    def summable(self) -> bool:
        return self.verdict == "summable"


def check_s0(model: SpectralModel, s0: float, margin: float = 0.05) -> S0Report:
    """Partial sums of ``<xi>^{-s0}`` over shells ``|xi| = k`` and a tail-slope verdict.

    The series is declared summable when the shell terms decay faster than
    ``k^{-(1 + margin)}`` over the upper half of the truncation.
    """
    if not s0 > 0:
        raise ModelError("s0 must be positive")
    a = np.abs(model.indices)
    shells = np.unique(a)
    terms = np.array([np.sum(model.weights[a == s] ** (-s0)) for s in shells])
    sums = np.cumsum(terms)
    ks = shells[shells >= 1]
    tk = terms[shells >= 1]
    upper = ks >= max(1, ks.max() // 2)
    slope = float(np.polyfit(np.log(ks[upper]), np.log(tk[upper]), 1)[0]) if upper.sum() >= 2 else 0.0
    verdict = "summable" if slope < -1.0 - margin else "not summable at truncation"
    return S0Report(float(s0), shells, sums, slope, verdict)


# ── probes and frame bounds ─────────────────────────────────────────────────


def probe_coefficients(model: SpectralModel, count: int, seed: int, decay: float = 2.0,
                       first: int = 0) -> np.ndarray:
    """Random coefficient vectors with ``<xi>^{-decay}`` envelope, shape ``(n, count)``.

    Draws are made in order of increasing ``|xi|`` (ties: negative first), so a
    smaller truncation sees a prefix of the same random sequence.  Probe ``p`` uses
    the stream seeded by ``(seed, first + p)``.
    """
    if count < 1:
        raise ModelError("probe set is empty")
    order = np.lexsort((model.indices, np.abs(model.indices)))
    env = model.weights ** (-decay)
    out = np.empty((model.size, count), dtype=complex)
    for p in range(count):
        rng = np.random.default_rng([int(seed), int(first + p)])
        z = rng.standard_normal((model.size, 2))
        col = np.empty(model.size, dtype=complex)
        col[order] = z[:, 0] + 1j * z[:, 1]
        out[:, p] = col * env
    return out


@dataclass(frozen=True)
class RieszBounds:
    m_lo: float
    M_hi: float
    count: int


def verify_riesz_bounds(model: SpectralModel, probe_count: int = 32, seed: int = 0,
                        decay: float = 2.0) -> RieszBounds:
    """Empirical range of ``(sum |f^(xi)|^2)^{1/2} / ||f||`` over random probes."""
    c = probe_coefficients(model, probe_count, seed, decay)
    f = model.U @ c
    norms = np.sqrt(model.grid.integrate(np.abs(f) ** 2))
    if np.any(norms == 0):
        raise ModelError("zero probe")
    coeffs = model.V.conj().T @ (model.w[:, None] * f)
    ratios = np.sqrt(np.sum(np.abs(coeffs) ** 2, axis=0)) / norms
    return RieszBounds(float(ratios.min()), float(ratios.max()), probe_count)


def frame_bounds(model: SpectralModel) -> tuple[float, float]:
    """Sharp bounds of the same ratio over the whole truncated span.

    For ``f = sum c_xi u_xi`` the ratio is ``|c| / sqrt(c^* G c)`` with ``G`` the
    Gram matrix of the ``u`` family, so the extremes are ``lambda_max(G)^{-1/2}``
    and ``lambda_min(G)^{-1/2}``.
    """
    ev = np.linalg.eigvalsh(model.gram_u())
    return float(ev.max() ** -0.5), float(ev.min() ** -0.5)


# ── invariant report ────────────────────────────────────────────────────────


def verify_model(model: SpectralModel, tol_biorth: float = 1e-8, tol_eig: float = 1e-8) -> list[Check]:
    """Biorthogonality, eigen-residuals, normalization and ordering checks."""
    suite = "model"
    G = model.gram()
    gerr = float(np.max(np.abs(G - np.eye(model.size))))
    checks = [Check(suite, "gram_identity", gerr, 0.0, tol_biorth, gerr < tol_biorth,
                    model.model_id, model.h if model.h is not None else "")]
    scale = np.maximum(1.0, np.abs(model.eigenvalues))
    res = model.eigen_residuals() / scale
    cres = model.conj_eigen_residuals() / scale
    for name, r in (("eigen_residual", res), ("conj_eigen_residual", cres)):
        k = int(np.argmax(r))
        checks.append(Check(suite, name, float(r[k]), 0.0, tol_eig, bool(r.max() < tol_eig),
                            int(model.indices[k]), "max"))
    un = np.sqrt(model.grid.integrate(np.abs(model.U) ** 2))
    uerr = float(np.max(np.abs(un - 1)))
    checks.append(Check(suite, "u_norm", uerr, 0.0, tol_biorth, uerr < tol_biorth))
    # biorthogonality takes precedence over unit norm of v; reported only
    checks.append(Check(suite, "v_norm_deviation", model.v_norm_deviation, 0.0, "", True,
                        asserted=False))
    checks.append(Check(suite, "index_ordering", float(index_ordering_ok(model)), 1.0, "",
                        index_ordering_ok(model)))
    wt = weight_table(model)
    ok = bool(np.all(wt.values >= 1.0) and wt.ordered(model.eigenvalues))
    checks.append(Check(suite, "weight_ordering", float(ok), 1.0, "", ok))
    return checks
