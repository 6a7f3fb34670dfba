"""``curvlab`` command line: ``verify``, ``sweep`` and ``aniso``.

Exit codes: 0 when every check passes, 1 when any check fails (including
precondition failures), 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import RunConfig, load_config
from .errors import ConfigError, CurvlabError
from .report import Report, write_csv, write_json

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2

DEFAULT_SWEEP_T = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
DEFAULT_ANISO_T = [1e-1, 1e-2, 1e-3, 1e-4]


def _guarded(report: Report, name: str, fn):
    """Run one check; library errors become a failed entry."""
    try:
        return fn()
    except CurvlabError as exc:
        report.add(name, False, error=f"{type(exc).__name__}: {exc}")
        return None


def _identity_entry(report: Report, rep):
    report.add(rep.name, rep.verdict, kind=rep.kind, lhs=rep.lhs, rhs=rep.rhs,
               residual_or_gap=rep.residual_or_gap, relative=rep.relative,
               scale=rep.relative_scale, grid_degree=rep.grid_degree, extras=rep.extras)


def _spec(cfg: RunConfig, amb, rho: float):
    from .weingarten import WeingartenSpec, sphere_spec
    w = cfg.section("weingarten")
    r = int(w.get("r", 2))
    a = float(w.get("a", 0.0))
    b = w.get("b", "exact")
    try:
        if b == "exact":
            return sphere_spec(amb, rho, r, a)
        return WeingartenSpec(r, a, float(b))
    except (CurvlabError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [weingarten] section: {exc}") from exc


def cmd_verify(cfg: RunConfig) -> Report:
    from . import identities as ids
    from .weingarten import fit_coefficients, stability_chain

    report = Report("verify", cfg.echo())
    surface = cfg.surface()
    tol = cfg.tol
    n = surface.n
    checks = [("divergence", lambda: ids.divergence_residual(surface, tol)),
              ("minkowski_r1", lambda: ids.minkowski_residual(surface, 1, tol))]
    for r in range(2, n + 1):
        if surface.is_space_form:
            checks.append((f"minkowski_r{r}", lambda r=r: ids.minkowski_residual(surface, r, tol)))
        checks.append((f"generalized_minkowski_r{r}", lambda r=r: ids.generalized_minkowski_gap(surface, r, tol)))
    checks.append(("heintze_karcher", lambda: ids.heintze_karcher_gap(surface, tol)))
    if surface.is_space_form:
        checks.append(("michael_simon", lambda: ids.michael_simon_ratio(surface)))
    checks.append((f"maclaurin_r{n}", lambda: ids.maclaurin_report(surface, n, tol)))
    for name, fn in checks:
        rep = _guarded(report, name, fn)
        if rep is not None:
            _identity_entry(report, rep)

    w = cfg.section("weingarten")
    if w and surface.is_space_form:
        r = int(w.get("r", 2))
        fit = _guarded(report, "weingarten_fit", lambda: fit_coefficients(surface, r))
        if fit is not None:
            report.sections["weingarten_fit"] = {"a": fit.a, "b": fit.b, "residual": fit.residual,
                                                 "feasible": fit.feasible}
            if w.get("fit", False):
                from .weingarten import WeingartenSpec
                spec = WeingartenSpec(r, fit.a, fit.b)
            else:
                spec = _spec(cfg, surface.ambient, float(cfg.section("surface").get("radius", 1.0)))
            samples, seed = cfg.cn_settings()
            from .symfun import estimate_cn
            cn = _guarded(report, "cn_estimate", lambda: estimate_cn(n, r, samples, seed))
            if cn is not None:
                chain = _guarded(report, "stability_chain", lambda: stability_chain(surface, spec, cn=cn))
                if chain is not None:
                    report.sections["defect"] = chain.to_dict()
                    report.sections["spec"] = {"r": spec.r, "a": spec.a, "b": spec.b}
                    report.add("stability_chain", chain.chain_ok, slack=chain.inegtau4_slack)
    return report


def cmd_sweep(cfg: RunConfig) -> tuple:
    from .ambient import SpaceForm
    from .symfun import estimate_cn
    from .weingarten import stability_sweep

    report = Report("sweep", cfg.echo())
    amb = cfg.ambient()
    s = cfg.section("surface")
    if not isinstance(amb, SpaceForm):
        raise ConfigError("sweep needs a space-form ambient")
    if s.get("family", "perturbed_sphere") != "perturbed_sphere":
        raise ConfigError("sweep needs surface.family = 'perturbed_sphere'")
    rho = float(s.get("radius", 1.0))
    spec = _spec(cfg, amb, rho)
    t = cfg.t_values("sweep", DEFAULT_SWEEP_T)
    samples, seed = cfg.cn_settings()
    rows = []
    cn = _guarded(report, "cn_estimate", lambda: estimate_cn(amb.n, spec.r, samples, seed))
    if cn is None:
        return report, rows
    res = _guarded(report, "stability_sweep",
                   lambda: stability_sweep(lambda tv: cfg.surface(amplitude=tv), spec, t, cn=cn))
    if res is None:
        return report, rows
    recs = res.records
    report.add("eps_l1_monotone", res.eps_monotone)
    report.add("dH_monotone", res.dH_monotone)
    report.add("gamma_positive", res.gamma_hat > 0, gamma_hat=res.gamma_hat)
    report.add("power_law_envelope", res.envelope_ok, C_hat=res.C_hat)
    report.add("chain_inequality", all(r.chain_slack >= 0 for r in recs),
               min_slack=min(r.chain_slack for r in recs))
    eps_ratio = recs[-1].eps_l1 / recs[0].eps_l1
    dH_ratio = recs[-1].dH / recs[0].dH
    thr = cfg.section("sweep").get("decay_threshold")
    if thr is not None:
        report.add("decay_threshold", eps_ratio < thr and dH_ratio < thr,
                   eps_ratio=eps_ratio, dH_ratio=dH_ratio, threshold=float(thr))
    report.sections["summary"] = {
        "gamma_hat": res.gamma_hat, "C_hat": res.C_hat, "C_fit": res.C_fit, "cn": cn,
        "spec": {"r": spec.r, "a": spec.a, "b": spec.b}, "family": s.get("family", "perturbed_sphere"),
        "grid_degree": cfg.degree, "eps_ratio": eps_ratio, "dH_ratio": dH_ratio,
        "gamma_note": "the sharp exponent alpha/(2(n+1)) is not computable; gamma_hat is empirical",
    }
    header = ["t", "eps_l1", "dH", "rho0", "tau_np1_pow", "K3_eps", "chain_slack"]
    rows = [[r.t, r.eps_l1, r.dH, r.rho0, r.tau_np1_pow, r.K3_eps, r.chain_slack] for r in recs]
    report.sections["records"] = [dict(zip(header, row)) for row in rows]
    return report, (header, rows)


def _anisotropy(cfg: RunConfig, n: int):
    from . import aniso
    a = cfg.section("aniso")
    fam = a.get("family", "ellipsoidal")
    try:
        if fam == "constant":
            return aniso.constant_anisotropy(float(a.get("c", 1.0)))
        if fam == "linear":
            return aniso.linear_anisotropy([float(x) for x in a.get("v", [0.0] * n + [0.1])], n)
        if fam == "ellipsoidal":
            return aniso.ellipsoidal_anisotropy([float(x) for x in a.get("Q", [1.0] * (n + 1))])
    except (CurvlabError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid [aniso] section: {exc}") from exc
    raise ConfigError(f"unknown anisotropy family {fam!r}")


def cmd_aniso(cfg: RunConfig) -> tuple:
    from . import aniso
    from .ambient import SpaceForm
    from .functions import Affine, Product
    from .grid import build_grid
    from .hypersurface import RadialGraph
    from .weingarten import WeingartenSpec

    report = Report("aniso", cfg.echo())
    amb = cfg.ambient()
    if not (isinstance(amb, SpaceForm) and amb.delta == 0):
        raise ConfigError("aniso needs a Euclidean ambient (delta = 0)")
    n = amb.n
    a = cfg.section("aniso")
    F = _anisotropy(cfg, n)
    grid = build_grid(n, cfg.degree)
    margin = aniso.convexity_margin(F, grid)
    report.add("convexity", margin > 0, margin=margin)
    report.sections["anisotropy"] = {"name": F.name, "convexity_margin": margin}
    if margin <= 0:
        return report, None
    wulff = _guarded(report, "wulff_shape", lambda: aniso.wulff_shape(F, n, cfg.degree))
    if wulff is None:
        return report, None
    report.sections["wulff"] = {"volume": wulff.volume, "rho": wulff.rho}
    surface = wulff.surface if a.get("surface", "wulff") == "wulff" else cfg.surface()
    if surface is None:
        raise ConfigError("this anisotropy has no closed-form Wulff radius; set aniso.surface = 'configured'")
    for r in range(n):
        rep = _guarded(report, f"aniso_minkowski_r{r}", lambda r=r: aniso.aniso_minkowski_residual(surface, F, r, cfg.tol))
        if rep is not None:
            _identity_entry(report, rep)
    rep = _guarded(report, "aniso_heintze_karcher", lambda: aniso.aniso_hk_gap(surface, F, cfg.tol))
    if rep is not None:
        _identity_entry(report, rep)

    if F.wulff_radius is None:
        return report, None
    try:
        spec = WeingartenSpec(int(a.get("r", 2)), float(a.get("a", 0.5)), float(a.get("b", 0.5)))
    except (CurvlabError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid aniso spec: {exc}") from exc
    Y = cfg.harmonic(a, n + 1)
    t = cfg.t_values("aniso", DEFAULT_ANISO_T)

    def family(tv):
        return RadialGraph(amb, Product(F.wulff_radius, Affine(Y, 1.0, tv)), grid, "perturbed Wulff shape")

    res = _guarded(report, "aniso_sweep",
                   lambda: aniso.aniso_stability_sweep(family, F, spec, t, float(a.get("ratio_bound", 10.0))))
    if res is None:
        return report, None
    report.add("aniso_co_vanishing", res.co_vanishing)
    report.add("aniso_bounded_ratio", res.bounded, ratio_min=res.ratio_min, ratio_max=res.ratio_max,
               ratio_bound=res.ratio_bound)
    header = ["t", "eps_l2", "w22_norm", "rho", "tauF_l2_sq"]
    rows = [[r.t, r.eps_l2, r.w22_norm, r.rho, r.tauF_l2_sq] for r in res.records]
    report.sections["sweep"] = {"records": [dict(zip(header, row)) for row in rows],
                                "slope": res.slope, "note": res.degenerate_p_clause}
    return report, (header, rows)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="curvlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("verify", "integral identities and inequalities for one surface"),
                        ("sweep", "stability sweep toward an exact Weingarten sphere"),
                        ("aniso", "anisotropic checks, Wulff shape and Wulff-proximity sweep")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", type=Path, required=True, help="TOML run configuration")
        sp.add_argument("--out", type=Path, default=Path("."), help="output directory")
        sp.add_argument("--degree", type=int, help="grid degree (overrides the config)")
        sp.add_argument("--seed", type=int, help="random seed (overrides the config)")
        sp.add_argument("--tol", type=float, help="relative tolerance (overrides the config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, degree=args.degree, seed=args.seed, tol=args.tol)
        if args.command == "verify":
            report, table = cmd_verify(cfg), None
        elif args.command == "sweep":
            report, table = cmd_sweep(cfg)
        else:
            report, table = cmd_aniso(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CurvlabError as exc:
        report, table = Report(args.command, cfg.echo()), None
        report.errors.append(f"{type(exc).__name__}: {exc}")

    try:
        args.out.mkdir(parents=True, exist_ok=True)
        data = report.as_dict()
        write_json(args.out / "report.json", data)
        if table:
            write_csv(args.out / "sweep.csv", *table)
    except OSError as exc:
        print(f"cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for c in report.checks:
        print(f"{c['verdict'].upper():4}  {c['name']}")
    for e in report.errors:
        print(f"ERROR {e}")
    summary = report.sections.get("summary")
    if summary:
        print(f"gamma_hat = {summary['gamma_hat']!r}  C_hat = {summary['C_hat']!r}")
    print(f"content hash {data['content_hash']}")
    return EXIT_OK if report.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
