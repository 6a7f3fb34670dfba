"""Linear Weingarten relations ``H_r = a H + b`` and their quantitative stability.

The defect of a surface against a relation is ``eps = H_r - a H - b``.  The
stability chain bounds the traceless second fundamental form ``tau`` by the
defect through explicit constants ``K1..K4``; the stability sweep measures how
the Hausdorff distance to the best-fit geodesic sphere scales with ``|eps|_1``
along a perturbation family.

Norms are volume-normalized, ``|f|_p = ((1/V) int |f|^p)^(1/p)``, and
``|B|_inf`` is the maximum over the surface of ``sqrt(sum k_i^2)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import lsq_linear

from .ambient import SpaceForm, cdelta, sdelta
from .errors import DomainError, GeometryError, PreconditionError
from .hypersurface import (
    RadialGraph,
    best_fit_geodesic_sphere,
    best_fit_slice,
    hausdorff_to_slice,
    hausdorff_to_sphere,
    integrate,
    surface_norm,
)
from .identities import michael_simon_ratio
from .symfun import estimate_cn, hr_extremal_pair

__all__ = [
    "WeingartenSpec",
    "FitResult",
    "DefectReport",
    "SweepRecord",
    "SweepResult",
    "ProbeVerdict",
    "sphere_spec",
    "defect_field",
    "fit_coefficients",
    "stability_chain",
    "stability_sweep",
    "fit_power_law",
    "rigidity_probe",
]


@dataclass(frozen=True)
class WeingartenSpec:
    r: int
    a: float
    b: float

    def __post_init__(self):
        if self.r < 2:
            raise DomainError(f"r={self.r} must be at least 2")
        if not self.a >= 0:
            raise DomainError(f"a={self.a!r} must be nonnegative")
        if not self.b > 0:
            raise DomainError(f"b={self.b!r} must be positive")


def sphere_spec(ambient: SpaceForm, rho: float, r: int, a: float = 0.0) -> WeingartenSpec:
    """The relation satisfied exactly by the geodesic sphere of radius ``rho``:
    ``b = H^r - a H`` with ``H = c_delta(rho) / s_delta(rho)``."""
    H = float(cdelta(ambient.delta, rho) / sdelta(ambient.delta, rho))
    return WeingartenSpec(r, a, H ** r - a * H)


def defect_field(surface: RadialGraph, spec: WeingartenSpec) -> np.ndarray:
    if spec.r > surface.n:
        raise DomainError(f"r={spec.r} exceeds n={surface.n}")
    fs = surface.frames
    return fs.Hr(spec.r) - spec.a * fs.H - spec.b


class FitResult(tuple):
    """``(a, b, residual)`` plus a ``feasible`` flag (False when the
    unconstrained optimum has ``b <= 0`` and ``b`` was projected)."""

    def __new__(cls, a, b, residual, feasible=True):
        obj = super().__new__(cls, (a, b, residual))
        obj.feasible = feasible
        return obj

    a = property(lambda self: self[0])
    b = property(lambda self: self[1])
    residual = property(lambda self: self[2])


_B_FLOOR = 1e-12


def fit_coefficients(surface: RadialGraph, r: int, rcond: float = 1e-10) -> FitResult:
    """Weighted least squares of ``H_r`` against ``(H, 1)`` with ``a >= 0``,
    ``b > 0``.  Rank-deficient cases (umbilic surfaces) return the
    minimal-norm solution; the residual is ``|eps|_2``.  When the
    unconstrained optimum has ``b <= 0`` the bounded problem is solved with
    ``b`` held at a small floor and ``feasible`` is False."""
    if not 2 <= r <= surface.n:
        raise DomainError(f"r={r} outside [2, {surface.n}]")
    fs = surface.frames
    Hr = fs.Hr(r)
    i = int(np.argmin(Hr))
    if not Hr[i] > 0:
        raise PreconditionError(f"H_{r} = {Hr[i]!r} is not positive at node {i}", value=float(Hr[i]), location=i)
    w = surface.measure / surface.measure.sum()
    sw = np.sqrt(w)
    A = np.stack([fs.H, np.ones_like(fs.H)], axis=1) * sw[:, None]
    y = Hr * sw
    a, b = np.linalg.lstsq(A, y, rcond=rcond)[0]
    feasible = bool(b > 0)
    if a < 0 or not feasible:
        sol = lsq_linear(A, y, bounds=([0.0, _B_FLOOR], [np.inf, np.inf]), tol=1e-15, lsmr_tol="auto")
        a, b = sol.x
        feasible = feasible and b > _B_FLOOR
    eps = Hr - a * fs.H - b
    return FitResult(float(a), float(b), math.sqrt(float(w @ eps ** 2)), bool(feasible))


@dataclass(frozen=True)
class DefectReport:
    eps_l1: float
    eps_l2: float
    eps_signed_mean: float
    tau_l2: float
    tau_np1: float
    hr_min: float
    hrn1_min: float
    B_sup: float
    R: float
    cn: float
    K1: float
    K2: float
    K3: float
    K3_sharp: float
    K4: float
    checks: dict = field(default_factory=dict)

    @property
    def chain_ok(self) -> bool:
        return all(c["ok"] for c in self.checks.values())

    @property
    def inegtau4_slack(self) -> float:
        return self.checks["tau_vs_eps"]["slack"]

    def to_dict(self) -> dict:
        d = asdict(self)
        d["chain_ok"] = self.chain_ok
        return d


def _check(lhs: float, rhs: float, tol: float) -> dict:
    slack = rhs - lhs
    return {"lhs": lhs, "rhs": rhs, "slack": slack,
            "ok": bool(slack >= -tol * max(abs(lhs), abs(rhs)))}


def stability_chain(surface: RadialGraph, spec: WeingartenSpec, cn: float | None = None,
                    tol: float = 1e-9) -> DefectReport:
    """Evaluate the constants ``K1..K4`` and every inequality in the chain
    from the pointwise pinching estimate to ``|tau|_{n+1}^{2(n+1)} <= K3 |eps|_1``.

    ``cn`` defaults to :func:`estimate_cn` for ``(n, r)``.  Where the chain
    integrates ``eps`` against positive weights the absolute value is used;
    the signed form of the Minkowski-based bound is checked as well.
    """
    sf = surface.ambient
    if not isinstance(sf, SpaceForm):
        raise GeometryError("the stability chain is formulated in space forms")
    n, r = surface.n, spec.r
    if not 2 <= r <= n:
        raise DomainError(f"r={r} outside [2, {n}]")
    fs = surface.frames
    Hr = fs.Hr(r)
    i = int(np.argmin(Hr))
    if not Hr[i] > 0:
        raise PreconditionError(f"H_{r} = {Hr[i]!r} is not positive at node {i}", value=float(Hr[i]), location=i)
    c = fs.conformal_f
    if not np.all(c > 0):
        raise PreconditionError("c_delta(rho) is not positive on the surface")
    pair = hr_extremal_pair(fs.kappa, r)
    j = int(np.argmin(pair))
    hmin = float(pair[j])
    if not hmin > 0:
        raise PreconditionError(f"min H_(r;n,1) = {hmin!r} is not positive", value=hmin, location=j)
    if cn is None:
        cn = estimate_cn(n, r)

    eps = defect_field(surface, spec)
    aeps = np.abs(eps)
    tau2 = fs.tau2
    V = surface.area
    Bsup = float(fs.B_norm.max())
    R = float(fs.u.max())
    delta = sf.delta
    root_min = float(np.min(Hr ** (1.0 / r)))

    K1 = 2 * Bsup ** (r - 1) / (cn * hmin ** 2)
    if delta > 0:
        K2 = K1 / float(cdelta(delta, R)) * (1 / root_min + 1 / math.sqrt(delta))
    elif delta == 0:
        K2 = K1 * (1 / root_min + R)
    else:
        K2 = K1 * (float(cdelta(delta, R)) / root_min + float(sdelta(delta, R)))
    K3 = K2 * Bsup ** (2 * n + 1)
    K3_sharp = K2 * Bsup ** (2 * n)
    ms = michael_simon_ratio(surface).extras
    c_phi = ms["higher_power_ratio"]
    K4 = K3 * c_phi ** 2 * V ** ((2 * n + 2) / n)

    eps_l1 = integrate(surface, aeps) / V
    tau_np1_pow = integrate(surface, tau2 ** ((n + 1) / 2)) / V
    lhs4 = tau_np1_pow ** 2
    int_tau2 = integrate(surface, tau2)

    pinch = K1 * (fs.Hr(r - 1) - Hr ** ((r - 1) / r))
    worst = int(np.argmax(tau2 - pinch))
    Hr_inv = Hr ** (-1.0 / r)
    signed_rhs = K1 * (integrate(surface, eps * fs.support) - integrate(surface, c * eps * Hr_inv)) / V
    abs_rhs = K1 * (integrate(surface, aeps * fs.support) + integrate(surface, c * aeps * Hr_inv)) / V
    lhs_c = integrate(surface, c * tau2) / V
    checks = {
        "pointwise_pinching": _check(float(tau2[worst]), float(pinch[worst]), tol) | {"node": worst},
        "weighted_tau_signed": _check(lhs_c, signed_rhs, tol),
        "weighted_tau_abs": _check(lhs_c, abs_rhs, tol),
        "tau_l2_vs_eps": _check(int_tau2, K2 * integrate(surface, aeps), tol),
        "cauchy_schwarz": _check(lhs4, Bsup ** (2 * n) * int_tau2 / V, tol),
        "tau_vs_eps": _check(lhs4, K3 * eps_l1, tol),
        "tau_vs_eps_sharp": _check(lhs4, K3_sharp * eps_l1, tol),
    }
    return DefectReport(
        eps_l1=eps_l1,
        eps_l2=surface_norm(surface, eps, 2),
        eps_signed_mean=integrate(surface, eps) / V,
        tau_l2=surface_norm(surface, np.sqrt(tau2), 2),
        tau_np1=tau_np1_pow ** (1 / (n + 1)),
        hr_min=float(Hr[i]), hrn1_min=hmin, B_sup=Bsup, R=R, cn=float(cn),
        K1=K1, K2=K2, K3=K3, K3_sharp=K3_sharp, K4=K4, checks=checks,
    )


@dataclass(frozen=True)
class SweepRecord:
    t: float
    eps_l1: float
    dH: float
    rho0: float
    tau_np1_pow: float = math.nan
    K3_eps: float = math.nan
    chain_slack: float = math.nan


@dataclass(frozen=True)
class SweepResult:
    records: tuple
    gamma_hat: float
    C_hat: float
    C_fit: float
    eps_monotone: bool
    dH_monotone: bool
    envelope_ok: bool

    def __iter__(self):
        # unpacks as (records, gamma_hat, C_hat)
        return iter((list(self.records), self.gamma_hat, self.C_hat))


def fit_power_law(eps, dH) -> tuple:
    """Fit ``log dH = log C + gamma log eps`` over the asymptotic (smallest
    ``eps``) half of the data.  Returns ``(gamma, C_fit, C_envelope)`` where
    the envelope constant is the least ``C`` with ``dH <= C eps^gamma`` on
    that half."""
    eps = np.asarray(eps, dtype=float)
    dH = np.asarray(dH, dtype=float)
    order = np.argsort(eps)
    half = order[: max(2, (len(eps) + 1) // 2)]
    x, y = np.log(eps[half]), np.log(dH[half])
    gamma, logC = np.polyfit(x, y, 1)
    env = float(np.max(y - gamma * x))
    return float(gamma), float(math.exp(logC)), float(math.exp(env))


def _strictly_decreasing(v) -> bool:
    v = np.asarray(v)
    return bool(np.all(np.diff(v) < 0))


def stability_sweep(family: Callable[[float], RadialGraph], spec: WeingartenSpec,
                    t_values: Sequence[float], chain: bool = True, cn: float | None = None) -> SweepResult:
    """Sweep a perturbation family toward an exact Weingarten sphere.

    ``family(t)`` returns the surface at amplitude ``t``; ``t_values`` must be
    positive and strictly decreasing.  For each point the record holds
    ``|eps|_1`` against the fixed ``spec``, the best-fit geodesic sphere
    radius and the Hausdorff distance to it.
    """
    t = np.asarray(t_values, dtype=float)
    if t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise DomainError("t_values must be positive and strictly decreasing with at least two entries")
    records = []
    for tv in t:
        s = family(float(tv))
        eps = defect_field(s, spec)
        fit = best_fit_geodesic_sphere(s)
        dH = hausdorff_to_sphere(s, fit.center, fit.rho0)
        extra = {}
        if chain:
            rep = stability_chain(s, spec, cn=cn)
            chk = rep.checks["tau_vs_eps"]
            extra = {"tau_np1_pow": chk["lhs"], "K3_eps": chk["rhs"], "chain_slack": chk["slack"]}
        records.append(SweepRecord(float(tv), surface_norm(s, eps, 1), dH, fit.rho0, **extra))
    e = [rec.eps_l1 for rec in records]
    d = [rec.dH for rec in records]
    gamma, C_fit, C_env = fit_power_law(e, d)
    g = min(gamma, 1.0)
    C_hat = max(C_env, float(np.max(np.asarray(d) / np.asarray(e) ** g)))
    env_ok = all(rec.dH <= C_hat * rec.eps_l1 ** g * (1 + 1e-12) for rec in records)
    return SweepResult(tuple(records), gamma, C_hat, C_fit, _strictly_decreasing(e),
                       _strictly_decreasing(d), env_ok)


@dataclass(frozen=True)
class ProbeVerdict:
    triggered: bool
    passed: bool
    eps_sup: float
    umbilicity_max: float
    fit_residual: float
    eta: float

    def __bool__(self) -> bool:
        return self.passed


def rigidity_probe(surface: RadialGraph, spec: WeingartenSpec, tol: float,
                   eta: Callable[[float], float] | float = 1e3) -> ProbeVerdict:
    """Numerical rigidity proxy.

    When ``|eps|_inf <= tol`` the surface must be umbilic and close to a
    geodesic sphere (space forms) or a slice (warped products):
    ``max |tau|^2 <= eta(tol)`` and the best-fit residual (Hausdorff distance
    to the fitted sphere or slice) ``<= eta(tol)``.  A numeric ``eta`` is a
    linear factor.  An untriggered probe passes vacuously.
    """
    eta_val = eta(tol) if callable(eta) else float(eta) * tol
    eps = defect_field(surface, spec)
    sup = float(np.max(np.abs(eps)))
    umb = float(np.max(surface.frames.tau2))
    if surface.is_space_form:
        fit = best_fit_geodesic_sphere(surface)
        res = hausdorff_to_sphere(surface, fit.center, fit.rho0)
    else:
        sl = best_fit_slice(surface)
        res = hausdorff_to_slice(surface, sl.t1)
    if sup > tol:
        return ProbeVerdict(False, True, sup, umb, res, eta_val)
    return ProbeVerdict(True, bool(umb <= eta_val and res <= eta_val), sup, umb, res, eta_val)
