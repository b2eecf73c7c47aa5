"""Command line entry point: verification campaigns that write CSV or JSON reports.

Every report starts with the package version, the git description of the
working tree (when available) and the full run configuration, so a report is
enough to reproduce itself.  The exit status is 0 when every asserted check
passed, 1 when one failed and 2 for invalid input.
"""

from __future__ import annotations

import argparse
import logging
import os
import subprocess
import sys
from contextlib import ExitStack
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig
from .report import Check, all_passed, render_csv, render_json

log = logging.getLogger("nonharm")



# ── helpers ─────────────────────────────────────────────────────────────────


def _git_describe() -> str:
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True,
                             text=True, cwd=Path(__file__).resolve().parent, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def _model(cfg: RunConfig):
    from .spectral_model import build_model

    mc = cfg.model
    return build_model(mc.model, mc.xi_max, h=mc.h, nodes=mc.nodes, quadrature=mc.quadrature,
                       m=mc.m, s0=mc.s0)


def _family(cfg: RunConfig, model):
    from .differences import make_family

    return make_family(cfg.difference.family, model.grid)


def _symbol(model, expr: str):
    from .quantize import generated_symbol

    return generated_symbol(model, expr)


def _need_rho_gt_delta(cfg: RunConfig) -> None:
    from .calculus import require_rho_gt_delta

    require_rho_gt_delta(cfg.rho, cfg.delta)


def _exponent_check(suite, name, exps, targets, tol, **kw) -> list[Check]:
    return [Check(suite, name, e, t, tol, bool(e <= t + tol), n, **kw)
            for n, (e, t) in enumerate(zip(exps, targets), start=1)]


# ── campaigns ───────────────────────────────────────────────────────────────


def cmd_model_verify(cfg: RunConfig, args) -> list[Check]:
    from .spectral_model import (build_periodic_model, check_s0, estimate_mu0, frame_bounds,
                                 verify_model, verify_riesz_bounds)

    tol = cfg.tolerances
    model = _model(cfg)
    checks = verify_model(model, tol.biorth, tol.eig)
    r1 = verify_riesz_bounds(model, cfg.probes, cfg.seed)
    r2 = verify_riesz_bounds(model, 2 * cfg.probes, cfg.seed)
    for name, a, b in (("riesz_m_lo", r1.m_lo, r2.m_lo), ("riesz_M_hi", r1.M_hi, r2.M_hi)):
        ch = abs(b - a) / a
        checks.append(Check("riesz", name, a, "stable", tol.riesz_stability,
                            a > 0 and ch <= tol.riesz_stability, cfg.probes, b))
    lo, hi = frame_bounds(model)
    checks.append(Check("riesz", "frame_lower", lo, "", "", True, asserted=False))
    checks.append(Check("riesz", "frame_upper", hi, "", "", True, asserted=False))
    mu0 = estimate_mu0(model)
    checks.append(Check("growth", "mu0", mu0.mu0, "", "", True, "C", mu0.C, asserted=False))
    s0 = check_s0(model, model.s0)
    checks.append(Check("growth", "s0_summable", s0.tail_slope, "<-1", "", s0.summable, model.s0))
    if model.model_id == "h-model" and model.h == 1.0:
        per = build_periodic_model(model.xi_max, model.grid)
        d = float(max(np.max(np.abs(per.U - model.U)), np.max(np.abs(per.eigenvalues - model.eigenvalues))))
        checks.append(Check("model", "h1_equals_periodic", d, 0, tol.exact, d < tol.exact))
    return checks


def cmd_transform_verify(cfg: RunConfig, args) -> list[Check]:
    from .spectral_model import probe_coefficients
    from .transform import (forward, forward_star, hausdorff_young_check, inverse, inverse_star,
                            parseval_check, sobolev_norm)

    tol = cfg.tolerances
    model = _model(cfg)
    F = model.U @ probe_coefficients(model, cfg.probes, cfg.seed)
    G = model.U @ probe_coefficients(model, cfg.probes, cfg.seed, first=cfg.probes)
    rt, rts, pm, spread, spread_soft, sob = 0.0, 0.0, 0.0, 0.0, 0.0, 0.0
    for p in range(cfg.probes):
        f = F[:, p]
        nf = np.max(np.abs(f))
        rt = max(rt, float(np.max(np.abs(inverse(model, forward(model, f)) - f)) / nf))
        fs = forward_star(model, f)
        back = forward_star(model, inverse_star(model, fs)).values
        rts = max(rts, float(np.max(np.abs(back - fs.values)) / nf))
        rep = parseval_check(model, f, G[:, p])
        pm = max(pm, rep.mismatch / max(1.0, abs(rep.lhs)))
        spread = max(spread, rep.norm_spread / rep.norm_l2)
        spread_soft = max(spread_soft, abs(rep.norm_star_truncated - rep.norm_l2) / rep.norm_l2)
        sob = max(sob, abs(sobolev_norm(model, f, 0.0, "l2L") - rep.norm_l2) / rep.norm_l2)
    checks = [
        Check("transform", "roundtrip", rt, 0, tol.roundtrip, rt < tol.roundtrip),
        Check("transform", "roundtrip_star_coefficients", rts, 0, tol.roundtrip, rts < tol.roundtrip),
        Check("transform", "parseval_mismatch", pm, 0, tol.parseval, pm < tol.parseval),
        Check("transform", "plancherel_norm_spread", spread, 0, tol.parseval, spread < tol.parseval),
        Check("transform", "star_norm_truncated_definition", spread_soft, 0, "", True, asserted=False),
        Check("transform", "sobolev_s0_equals_l2", sob, 0, tol.parseval, sob < tol.parseval),
    ]
    for p in (1.0, 1.5, 2.0):
        hy = hausdorff_young_check(model, p, cfg.probes, cfg.seed)
        checks.append(Check("hausdorff_young", "constant", hy.constant, "finite", tol.hy_stability,
                            hy.stable(tol.hy_stability), p, hy.constant_doubled))
        if model.model_id == "periodic":
            d = abs(hy.constant - 1.0)
            checks.append(Check("hausdorff_young", "periodic_unit_constant", d, 0, tol.roundtrip,
                                d < tol.roundtrip, p))
    return checks


def cmd_compose(cfg: RunConfig, args) -> list[Check]:
    from .calculus import compose_symbols
    from .quantize import multiplier_symbol

    _need_rho_gt_delta(cfg)
    tol = cfg.tolerances
    model = _model(cfg)
    fam = _family(cfg, model)
    rng = np.random.default_rng(cfg.seed)
    a = multiplier_symbol(model, rng.standard_normal(model.size) + 1j * rng.standard_normal(model.size))
    b = multiplier_symbol(model, rng.standard_normal(model.size) + 1j * rng.standard_normal(model.size))
    mm = compose_symbols(model, a, b, 1, fam, cfg.rho, cfg.delta, tol.mask_eps)
    err = float(np.max(np.abs(mm.exact.filled() - mm.truncated.filled()))
                / np.max(np.abs(mm.truncated.filled())))
    checks = [Check("compose", "multiplier_product_exact", err, 0, tol.exact, err < tol.exact)]
    sa, sb = _symbol(model, args.symbol_a), _symbol(model, args.symbol_b)
    res = compose_symbols(model, sa, sb, cfg.n_terms, fam, cfg.rho, cfg.delta, tol.mask_eps,
                          tol.exponent, tol.zero_floor)
    checks += _exponent_check("compose", "remainder_exponent", res.exponents, res.targets, tol.exponent,
                              param2=f"{args.symbol_a} o {args.symbol_b}")
    for n, d in enumerate(res.decrements(), start=1):
        checks.append(Check("compose", "exponent_decrement", d, cfg.rho - cfg.delta, tol.exponent,
                            bool(abs(d - (cfg.rho - cfg.delta)) <= tol.exponent), n, asserted=False))
    return checks


def cmd_adjoint(cfg: RunConfig, args) -> list[Check]:
    from .calculus import adjoint_symbol
    from .quantize import adjoint_op, multiplier_op, symbol_of_operator

    _need_rho_gt_delta(cfg)
    tol = cfg.tolerances
    model = _model(cfg)
    fam = _family(cfg, model)
    rng = np.random.default_rng(cfg.seed)
    sig = rng.standard_normal(model.size) + 1j * rng.standard_normal(model.size)
    t = symbol_of_operator(model, adjoint_op(model, multiplier_op(model, sig)), tol.mask_eps, "L*")
    err = float(np.max(np.abs(t.table - np.conj(sig)[None, :])[t.valid]) / np.max(np.abs(sig)))
    checks = [Check("adjoint", "multiplier_adjoint_conjugate", err, 0, tol.roundtrip, err < tol.roundtrip)]
    a = _symbol(model, args.symbol_a)
    res = adjoint_symbol(model, a, cfg.n_terms, fam, cfg.rho, cfg.delta, tol.mask_eps, tol.exponent,
                         tol.zero_floor)
    checks += _exponent_check("adjoint", "remainder_exponent", res.exponents, res.targets, tol.exponent,
                              param2=args.symbol_a)
    for n, d in enumerate(res.decrements(), start=1):
        checks.append(Check("adjoint", "exponent_decrement", d, cfg.rho - cfg.delta, tol.exponent,
                            bool(abs(d - (cfg.rho - cfg.delta)) <= tol.exponent), n, asserted=False))
    return checks


def cmd_amp_reduce(cfg: RunConfig, args) -> list[Check]:
    from .calculus import SeparableAmplitude, amplitude_to_symbol

    _need_rho_gt_delta(cfg)
    tol = cfg.tolerances
    model = _model(cfg)
    fam = _family(cfg, model)
    x = model.x
    decay = np.broadcast_to(model.weights[None, :] ** -1.0, (x.size, model.size)) + 0j
    flat = SeparableAmplitude((decay * np.cos(2 * np.pi * x)[:, None],), (np.ones_like(x) + 0j,), -1.0)
    r0 = amplitude_to_symbol(model, flat, 1, fam, cfg.rho, cfg.delta, tol.mask_eps)
    err = float(np.max(np.abs(r0.exact.filled() - r0.truncated.filled())))
    checks = [Check("amp_reduce", "y_independent_exact", err, 0, tol.roundtrip, err < tol.roundtrip)]
    amp = SeparableAmplitude((decay,), (np.sin(2 * np.pi * x) + 0j,), -1.0)
    res = amplitude_to_symbol(model, amp, cfg.n_terms, fam, cfg.rho, cfg.delta, tol.mask_eps,
                              tol.exponent, tol.zero_floor)
    checks += _exponent_check("amp_reduce", "remainder_exponent", res.exponents, res.targets,
                              tol.exponent, param2="sin(2 pi y) <xi>^-1")
    return checks


def cmd_classify(cfg: RunConfig, args) -> list[Check]:
    from .calculus import classify_symbol

    tol = cfg.tolerances
    model = _model(cfg)
    fam = _family(cfg, model)
    a = _symbol(model, args.symbol_a)
    rep = classify_symbol(model, a, a.order, cfg.rho, cfg.delta, cfg.difference.alpha_max,
                          cfg.difference.beta_max, fam, tol.mask_eps, tol.exponent, tol.zero_floor)
    checks = [Check("classify", "m_fit", rep.m_fit, rep.claim, tol.exponent,
                    bool(rep.m_fit <= rep.claim + tol.exponent), param2=args.symbol_a)]
    na, nb = rep.slopes.shape
    for al in range(na):
        for be in range(nb):
            s = float(rep.slopes[al, be])
            checks.append(Check("classify", "seminorm_slope", s, rep.bound(al, be), tol.exponent,
                                bool(s <= rep.bound(al, be) + tol.exponent), al, be))
    return checks


def _lambda_plus_sin(model):
    """Principal part ``lambda_xi`` and lower-order part ``sin(2 pi x)``."""
    return _symbol(model, "lambda"), _symbol(model, "xdep(sin)")


def _lambda_plus_sin_total(model):
    lam, s = _lambda_plus_sin(model)
    return lam + s


def cmd_parametrix(cfg: RunConfig, args) -> list[Check]:
    from .elliptic import parametrix

    _need_rho_gt_delta(cfg)
    tol = cfg.tolerances
    model = _model(cfg)
    fam = _family(cfg, model)
    parts = _lambda_plus_sin(model)
    res = parametrix(model, list(parts), model.m, cfg.n_terms - 1, fam, cfg.rho, cfg.delta,
                     tol.mask_eps, tol.zero_floor)
    checks = [Check("parametrix", "N0", res.ellipticity.N0, "", "", True, asserted=False),
              Check("parametrix", "C0", res.ellipticity.C0, ">0", "", res.ellipticity.C0 > 0)]
    for n, (r, rf) in enumerate(zip(res.residuals, res.residuals_full)):
        checks.append(Check("parametrix", "residual_band", r, "", "", True, n, asserted=False))
        checks.append(Check("parametrix", "residual_full_span", rf, "", "", True, n, asserted=False))
    checks.append(Check("parametrix", "residual_monotone", float(res.monotone()), 1, "", res.monotone()))
    step = cfg.rho - cfg.delta
    for n, e in enumerate(res.band_exponents):
        target = step * (n + 1) - tol.band_exponent
        checks.append(Check("parametrix", "band_decay_order", -e, target, tol.band_exponent,
                            bool(-e >= target), n))
    for n, o in enumerate(res.B_orders):
        target = -model.m - step * n
        checks.append(Check("parametrix", "B_order", o, target, tol.exponent,
                            bool(abs(o - target) <= tol.exponent), n, asserted=False))
    return checks


def cmd_kernel_decay(cfg: RunConfig, args) -> list[Check]:
    from .elliptic import kernel_decay_report

    tol = cfg.tolerances
    model = _model(cfg)
    fam = _family(cfg, model)
    expr = args.symbol_a
    mu = float(_symbol(model, expr).order)
    rep = kernel_decay_report(model, lambda m: _symbol(m, expr), fam, mu, rho=cfg.rho,
                              growth_limit=tol.kernel_growth)
    checks = [Check("kernel_decay", "threshold", rep.threshold, "", "", True, asserted=False)]
    for al, g in zip(rep.alphas, rep.growth):
        above = al > rep.threshold
        ok = (g < tol.kernel_growth) if above else True
        checks.append(Check("kernel_decay", "sup_growth_on_doubling", float(g),
                            f"<{tol.kernel_growth}" if above else "", "", ok, al, expr,
                            asserted=above))
    og = rep.offdiag_growth
    checks.append(Check("kernel_decay", "offdiag_weighted_sup_growth", og, f"<{tol.kernel_growth}", "",
                        og < tol.kernel_growth, rep.N))
    checks.append(Check("kernel_decay", "singularity_exponent", rep.singularity_exponent, "", "",
                        True, asserted=False))
    return checks


def cmd_bounds(cfg: RunConfig, args) -> list[Check]:
    from .elliptic import apriori_estimate_check, l2_boundedness_check, sobolev_boundedness_check
    from .quantize import symbol

    tol = cfg.tolerances
    model = _model(cfg)
    checks = []
    for expr in ("one", "xdep(sin)", "gauss_decay(8)"):
        r = l2_boundedness_check(model, _symbol(model, expr), 1)
        checks.append(Check("bounds", "l2_norm_vs_derivative_sup", r.norm, r.kappa_bound * r.C, "",
                            r.passed, expr, r.kappa))
    mu = model.m
    w = symbol(model, lambda x, xi, wt, lam: wt**mu, order=mu)
    for s in (0.0, 1.0):
        r = sobolev_boundedness_check(model, w, mu, s, cfg.probes, cfg.seed)
        d = max(abs(r.ratio - 1), abs(r.ratio_doubled - 1))
        checks.append(Check("bounds", "sobolev_weight_shift_ratio", d, 0, tol.exact, d < tol.exact, s))
    rng = np.random.default_rng(cfg.seed)
    coeffs = rng.standard_normal(3)
    smooth = symbol(model, lambda xx, xi, wt, lam: (coeffs[0] + coeffs[1] * np.sin(2 * np.pi * xx)
                                                      + coeffs[2] * np.cos(2 * np.pi * xx))
                    * np.ones_like(wt), order=0)
    r = sobolev_boundedness_check(model, smooth, 0.0, 1.0, cfg.probes, cfg.seed)
    checks.append(Check("bounds", "sobolev_ratio_order0", r.ratio, "stable", tol.riesz_stability,
                        r.stable(tol.riesz_stability), 1.0, r.ratio_doubled))
    if model.xi_max >= 64:
        ap = apriori_estimate_check(model, _lambda_plus_sin_total, mu, 0.0, 2.0, cfg.probes, cfg.seed, (model.xi_max // 2, model.xi_max),
                                    tol.apriori_stability)
        checks.append(Check("bounds", "apriori_constant_stability", ap.relative_change, 0,
                            tol.apriori_stability, ap.passed, ap.C[0], ap.C[1]))
    return checks


def cmd_embed(cfg: RunConfig, args) -> list[Check]:
    from .elliptic import sobolev_embedding_check

    tol = cfg.tolerances
    model = _model(cfg)
    r = sobolev_embedding_check(model, 1, 1.0, cfg.probes, cfg.seed)
    return [Check("embed", "sup_over_sobolev_ratio", r.ratio, "stable", tol.riesz_stability,
                  r.stable(tol.riesz_stability), cfg.probes, r.ratio_doubled)]


def cmd_singsupp(cfg: RunConfig, args) -> list[Check]:
    from .elliptic import parametrix, singular_support_demo

    _need_rho_gt_delta(cfg)
    model = _model(cfg)
    fam = _family(cfg, model)
    lam, s = _lambda_plus_sin(model)
    B = parametrix(model, [lam, s], model.m, 2, fam, cfg.rho, cfg.delta).sigma_B
    rep = singular_support_demo(model, lam + s, B)
    checks = []
    for name, peak in rep.peaks.items():
        checks.append(Check("singsupp", "indicator_peak", peak, 0.5, 2 * rep.cell,
                            abs(peak - 0.5) <= 2 * rep.cell, name, float(rep.indicators[name].max()),
                            asserted=False))
    return checks


def cmd_oracle(cfg: RunConfig, args) -> list[Check]:
    from .oracle import selftest

    if args.action != "selftest":
        raise ConfigError(f"unknown oracle action {args.action!r}")
    return selftest(cfg.seed)


COMMANDS: dict[str, Callable] = {
    "model-verify": cmd_model_verify,
    "transform-verify": cmd_transform_verify,
    "compose": cmd_compose,
    "adjoint": cmd_adjoint,
    "amp-reduce": cmd_amp_reduce,
    "classify": cmd_classify,
    "parametrix": cmd_parametrix,
    "kernel-decay": cmd_kernel_decay,
    "bounds": cmd_bounds,
    "embed": cmd_embed,
    "singsupp": cmd_singsupp,
    "oracle": cmd_oracle,
}

DEFAULT_SYMBOLS = {
    "compose": ("lambda", "xdep(sin)"),
    "adjoint": ("xdep(sin)*poly_decay(1)", ""),
    "classify": ("lambda", ""),
    "kernel-decay": ("poly_decay(-1)", ""),
}


# ── argument parsing ────────────────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="report directory")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="nonharm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "oracle":
            p.add_argument("action", choices=("selftest",))
        if name in DEFAULT_SYMBOLS:
            a, b = DEFAULT_SYMBOLS[name]
            p.add_argument("--symbol-a", default=a, help="symbol expression (see generated_symbol)")
            if b:
                p.add_argument("--symbol-b", default=b)
    return parser


def _thread_limit():
    """``threadpool_limits`` context for ``NONHARM_THREADS``, or None when unset."""
    n = os.environ.get("NONHARM_THREADS")
    if not n:
        return None
    from threadpoolctl import threadpool_limits

    try:
        count = int(n)
    except ValueError:
        raise ConfigError(f"NONHARM_THREADS must be an integer, got {n!r}") from None
    if count < 1:
        raise ConfigError("NONHARM_THREADS must be at least 1")
    return threadpool_limits(limits=count)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        cfg = cfg.with_overrides(seed=args.seed, out=args.out, format=args.format)
        cfg.validate()
        with ExitStack() as stack:
            limiter = _thread_limit()
            if limiter is not None:
                stack.enter_context(limiter)
            checks = COMMANDS[args.command](cfg, args)
    except (ConfigError, ValueError) as exc:
        print(f"nonharm {args.command}: error: {exc}", file=sys.stderr)
        return 2
    header = {"tool": "nonharm", "version": __version__, "git": _git_describe(),
              "command": args.command, "config": cfg.to_dict()}
    for key in ("symbol_a", "symbol_b"):
        if getattr(args, key, None):
            header[key] = getattr(args, key)
    text = render_csv(checks, header) if cfg.format == "csv" else render_json(checks, header)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{args.command.replace('-', '_')}.{cfg.format}"
    path.write_text(text)
    ok = all_passed(checks)
    failed = [c for c in checks if c.asserted and not c.passed]
    print(f"{args.command}: {len(checks)} checks, {len(failed)} failed -> {path}")
    for c in failed:
        print(f"  FAIL {c.suite}/{c.check} param1={c.param1} measured={c.measured} target={c.target}")
    return 0 if ok else 1


def main(argv=None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
