"""Brute-force reference computations.

Nothing here calls the assembly code of :mod:`nonharm.quantize`; kernels are built
term by term from explicit rules so that cross-checks compare two independent
code paths.  The log-log fitting helper is shared by every decay measurement.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .report import Check
from .spectral_model import SpectralModel

log = logging.getLogger(__name__)


# ── log-log fits ────────────────────────────────────────────────────────────


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    r2: float
    band: tuple[float, float]
    points: int


def reliable_band(xs, lower: float = 0.25, upper: float = 0.75) -> tuple[float, float]:
    """Interval between two quantiles of ``xs`` (middle two quartiles by default)."""
    xs = np.asarray(xs, dtype=float)
    return float(np.quantile(xs, lower)), float(np.quantile(xs, upper))


def loglog_fit(xs, ys, band: tuple[float, float] | None = None) -> FitResult:
    """Least-squares slope of ``log ys`` against ``log xs``.

    Points outside ``band`` (inclusive, on ``xs``) and nonpositive values are
    dropped.  Fewer than two usable points give a NaN slope.
    """
    xs = np.asarray(xs, dtype=float).ravel()
    ys = np.asarray(ys, dtype=float).ravel()
    keep = (xs > 0) & (ys > 0) & np.isfinite(ys)
    if band is not None:
        keep &= (xs >= band[0]) & (xs <= band[1])
    used = band if band is not None else (float(xs.min()), float(xs.max()))
    lx, ly = np.log(xs[keep]), np.log(ys[keep])
    if lx.size < 2 or np.ptp(lx) == 0:
        return FitResult(float("nan"), float("nan"), float("nan"), used, int(lx.size))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return FitResult(float(slope), float(intercept), r2, used, int(lx.size))


# ── dense assembly ──────────────────────────────────────────────────────────

Rule = Callable[[np.ndarray, np.ndarray, int], np.ndarray]


def dense_assemble(model: SpectralModel, rule: Rule):
    """Kernel ``K[i, j] = sum_k rule(x_i, y_j, k)`` over index positions ``k``.

    ``rule`` receives ``x`` as a column and ``y`` as a row so it may broadcast.
    """
    from .quantize import OperatorMatrix  # container only

    x = model.x[:, None]
    y = model.x[None, :]
    K = np.zeros((model.grid.count, model.grid.count), dtype=complex)
    for k in range(model.size):
        K += rule(x, y, k)
    return OperatorMatrix(K, model.w)


def symbol_rule(model: SpectralModel, table: np.ndarray, flavor: str = "L") -> Rule:
    """Rule for ``sum_xi a(x, xi) u_xi(x) conj(v_xi(y))`` (``L*``: u and v swapped)."""
    syn, ana = (model.U, model.V) if flavor == "L" else (model.V, model.U)
    table = np.asarray(table)

    def rule(x, y, k):
        return (table[:, k] * syn[:, k])[:, None] * np.conj(ana[:, k])[None, :]

    return rule


def projector_rule(model: SpectralModel) -> Rule:
    return symbol_rule(model, np.ones((model.grid.count, model.size)))


def periodic_rule(table_fn: Callable[[np.ndarray, int], np.ndarray]) -> Rule:
    """Closed-form periodic kernel ``a(x, xi) e^{2 pi i xi (x - y)}`` without the model arrays."""

    def rule(x, y, k):
        return table_fn(x, k) * np.exp(2j * np.pi * k * (x - y))

    return rule


def dense_multiplication(model: SpectralModel, g):
    from .quantize import OperatorMatrix

    g = np.asarray(g, dtype=complex)
    K = np.zeros((model.grid.count, model.grid.count), dtype=complex)
    for i in range(model.grid.count):
        K[i, i] = g[i] / model.w[i]
    return OperatorMatrix(K, model.w)


def dense_adjoint(A):
    """Weighted adjoint ``W^{-1} M^H W`` of the sample matrix ``M = K W``."""
    from .quantize import OperatorMatrix

    w = A.weights
    M = A.kernel * w[None, :]
    Mstar = (M.conj().T * w[None, :]) / w[:, None]
    return OperatorMatrix(Mstar / w[None, :], w)


def dense_norm(A) -> float:
    """Operator norm from a full SVD of ``W^{1/2} K W^{1/2}`` (slow, exact)."""
    s = np.sqrt(A.weights)
    return float(np.linalg.svd(s[:, None] * A.kernel * s[None, :], compute_uv=False)[0])


def forward_difference(values, steps: int = 1) -> np.ndarray:
    """``sigma(xi + 1) - sigma(xi)`` applied ``steps`` times; NaN where undefined."""
    out = np.asarray(values, dtype=complex)
    for _ in range(steps):
        nxt = np.full_like(out, np.nan)
        nxt[..., :-1] = out[..., 1:] - out[..., :-1]
        out = nxt
    return out


# ── Dirichlet eigenvalues by finite differences ─────────────────────────────


def fd_eigensolve_dirichlet(n_fd: int = 4096, count: int = 8, richardson: bool = True) -> np.ndarray:
    """Lowest ``count`` eigenvalues of ``-d^2/dx^2`` on (0, 1) with zero boundary values.

    Three-point Laplacian on ``n_fd`` interior points; with ``richardson`` the
    ``O(h^2)`` error is removed using a second grid of half the spacing.
    """

    def solve(n):
        h = 1.0 / (n + 1)
        d = np.full(n, 2.0 / h**2)
        e = np.full(n - 1, -1.0 / h**2)
        return eigh_tridiagonal(d, e, eigvals_only=True, select="i", select_range=(0, count - 1))

    coarse = solve(n_fd)
    if not richardson:
        return coarse
    fine = solve(2 * n_fd + 1)
    return (4.0 * fine - coarse) / 3.0


# ── quadrature convergence ──────────────────────────────────────────────────


@dataclass(frozen=True)
class QuadratureReport:
    nodes: tuple[int, ...]
    gram_errors: tuple[float, ...]
    floor: float

    def monotone(self) -> bool:
        """Errors never increase until they reach the rounding floor."""
        e = self.gram_errors
        return all(b <= a or b <= self.floor for a, b in zip(e, e[1:]))


def quadrature_convergence(builder: Callable[[int], SpectralModel], nodes: Sequence[int],
                           floor: float = 1e-12) -> QuadratureReport:
    errs = []
    for n in nodes:
        m = builder(int(n))
        errs.append(float(np.max(np.abs(m.gram() - np.eye(m.size)))))
    return QuadratureReport(tuple(int(n) for n in nodes), tuple(errs), floor)


# ── self test ───────────────────────────────────────────────────────────────


def selftest(seed: int = 0) -> list[Check]:
    """Run the oracle-level sanity checks on small problems."""
    from .quantize import Symbol, op_from_symbol
    from .spectral_model import build_h_model, build_model, gauss_legendre_grid

    rng = np.random.default_rng(seed)
    checks: list[Check] = []

    xs = np.linspace(1, 10, 50)
    f = loglog_fit(xs, xs**2)
    checks.append(Check("oracle", "fit_square", abs(f.slope - 2), 2, 1e-10, abs(f.slope - 2) < 1e-10))
    noisy = xs**-3 * (1 + 0.01 * rng.standard_normal(xs.size))
    f = loglog_fit(xs, noisy)
    checks.append(Check("oracle", "fit_noisy_cube", f.slope, -3, 0.05, abs(f.slope + 3) < 0.05))
    f = loglog_fit(xs, np.full_like(xs, 3.0))
    checks.append(Check("oracle", "fit_constant", f.slope, 0, 1e-10, abs(f.slope) < 1e-10))

    ev = fd_eigensolve_dirichlet(4096, 3)
    for j in (1, 2):
        rel = abs(ev[j - 1] - (j * np.pi) ** 2) / (j * np.pi) ** 2
        checks.append(Check("oracle", "fd_dirichlet_eigenvalue", rel, 0, 1e-3, rel < 1e-3, param1=j))
    checks.append(Check("oracle", "fd_monotone", float(np.min(np.diff(ev))), ">0", "",
                        bool(np.all(np.diff(ev) > 0))))

    grid = gauss_legendre_grid(256)
    model = build_h_model(2.0, 16, grid)
    P1 = dense_assemble(model, projector_rule(model))
    P2 = op_from_symbol(model, Symbol(np.ones((grid.count, model.size))))
    d = float(np.max(np.abs(P1.kernel - P2.kernel)))
    checks.append(Check("oracle", "projector_vs_quantize", d, 0, 1e-12, d < 1e-12))
    for r in range(2):
        tab = rng.standard_normal((grid.count, model.size)) + 1j * rng.standard_normal((grid.count, model.size))
        K1 = dense_assemble(model, symbol_rule(model, tab)).kernel
        K2 = op_from_symbol(model, Symbol(tab)).kernel
        d = float(np.max(np.abs(K1 - K2)) / np.max(np.abs(K1)))
        checks.append(Check("oracle", "random_symbol_vs_quantize", d, 0, 1e-10, d < 1e-10, param1=r))

    rep = quadrature_convergence(lambda n: build_h_model(2.0, 8, gauss_legendre_grid(n)), [40, 48, 64, 96])
    checks.append(Check("oracle", "gl_quadrature_monotone", rep.gram_errors[-1], "monotone", "",
                        rep.monotone()))
    pm = build_model("periodic", 8, nodes=40, quadrature="trapezoid")
    g = float(np.max(np.abs(pm.gram() - np.eye(pm.size))))
    checks.append(Check("oracle", "trapezoid_discrete_orthogonality", g, 0, 1e-12, g < 1e-12))
    return checks
