"""Residuals of the integral identities and gaps of the integral inequalities.

All quantities use the outward unit normal, for which round spheres have
positive principal curvatures.  With ``X = h d/dt`` (equal to
``s_delta(rho) grad rho`` in a space form) and ``f = h'(t)``:

    Minkowski     int (H_r <X,nu> - f H_{r-1}) = 0
    divergence    int <X,nu> = (n+1) int_Omega f + inner flux
    Heintze-Karcher      int f/H - (n+1) int_Omega f - inner flux >= 0
    generalized Minkowski  int (H_r <X,nu> - f H_{r-1}) >= 0

``Omega = {0 <= t < u}``.  The inner flux is the flux of ``X`` through
``{0} x M``; it vanishes in space forms and whenever ``h(0) = 0``.

Each function returns an :class:`IdentityReport` whose ``relative_scale`` is
``|lhs| + |rhs|``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .ambient import SpaceForm, check_warping_conditions
from .errors import DomainError, GeometryError, PreconditionError
from .hypersurface import (
    RadialGraph,
    enclosed_weighted_volume,
    euclidean_model_surface,
    integrate,
    starshape_margin,
)
from .symfun import maclaurin_chain

__all__ = [
    "IdentityReport",
    "DEFAULT_TOL",
    "minkowski_residual",
    "divergence_residual",
    "generalized_minkowski_gap",
    "heintze_karcher_gap",
    "michael_simon_ratio",
    "maclaurin_report",
    "identity_suite",
]

DEFAULT_TOL = 1e-6


@dataclass(frozen=True)
class IdentityReport:
    name: str
    kind: str  # "identity", "inequality" or "report"
    lhs: float
    rhs: float
    residual_or_gap: float
    relative_scale: float
    verdict: bool
    grid_degree: int
    tol: float
    extras: dict = field(default_factory=dict)

    @property
    def relative(self) -> float:
        if self.relative_scale == 0:
            return 0.0 if self.residual_or_gap == 0 else math.inf
        return self.residual_or_gap / self.relative_scale

    @property
    def gap(self) -> float:
        return self.residual_or_gap

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = "pass" if self.verdict else "fail"
        d["relative"] = self.relative
        return d


def _scale(lhs: float, rhs: float) -> float:
    return abs(lhs) + abs(rhs)


def _identity(name, lhs, rhs, surface, tol, **extras) -> IdentityReport:
    res = lhs - rhs
    scale = _scale(lhs, rhs)
    return IdentityReport(name, "identity", lhs, rhs, res, scale, bool(abs(res) <= tol * scale),
                          surface.grid.degree, tol, extras)


def _inequality(name, lhs, rhs, surface, tol, **extras) -> IdentityReport:
    gap = lhs - rhs
    scale = _scale(lhs, rhs)
    return IdentityReport(name, "inequality", lhs, rhs, gap, scale, bool(gap >= -tol * scale),
                          surface.grid.degree, tol, extras)


def _check_r(surface, r, lo=1):
    if not lo <= r <= surface.n:
        raise DomainError(f"r={r} outside [{lo}, {surface.n}]")


def minkowski_residual(surface: RadialGraph, r: int = 1, tol: float = DEFAULT_TOL) -> IdentityReport:
    """``int H_r <X,nu>`` against ``int f H_{r-1}``.

    Space forms accept any ``r`` in ``1..n``; warped products only ``r = 1``
    (for ``r >= 2`` the identity picks up an ambient curvature term and
    becomes :func:`generalized_minkowski_gap`).
    """
    _check_r(surface, r)
    if not surface.is_space_form and r != 1:
        raise DomainError("in a warped product the Minkowski identity is only exact for r = 1")
    fs = surface.frames
    lhs = integrate(surface, fs.Hr(r) * fs.support)
    rhs = integrate(surface, fs.conformal_f * fs.Hr(r - 1))
    return _identity(f"minkowski_r{r}", lhs, rhs, surface, tol, r=r)


def divergence_residual(surface: RadialGraph, tol: float = DEFAULT_TOL) -> IdentityReport:
    fs = surface.frames
    flux = surface.ambient.inner_flux()
    lhs = integrate(surface, fs.support)
    rhs = (surface.n + 1) * enclosed_weighted_volume(surface, "f") + flux
    return _identity("divergence", lhs, rhs, surface, tol, inner_flux=flux)


def generalized_minkowski_gap(surface: RadialGraph, r: int, tol: float = DEFAULT_TOL,
                              check_grid: int = 256) -> IdentityReport:
    """``int H_r <X,nu> - int f H_{r-1}``, nonnegative for star-shaped
    hypersurfaces of warped products satisfying (H1)-(H4).

    In a space form the gap is the Minkowski residual and vanishes.
    """
    _check_r(surface, r)
    margin = starshape_margin(surface)
    if not margin > 0:
        raise PreconditionError(f"surface is not star-shaped (margin {margin!r})", value=margin)
    if not surface.is_space_form:
        report = check_warping_conditions(surface.ambient, grid_size=check_grid)
        for cond in report.conditions:
            if cond.name != "consistency" and not cond.passed:
                raise PreconditionError(f"warping condition {cond.name} fails (margin {cond.worst_margin!r})",
                                        value=cond.worst_margin, location=cond.location)
    fs = surface.frames
    lhs = integrate(surface, fs.Hr(r) * fs.support)
    rhs = integrate(surface, fs.conformal_f * fs.Hr(r - 1))
    return _inequality(f"generalized_minkowski_r{r}", lhs, rhs, surface, tol, r=r,
                       starshape_margin=margin)


def heintze_karcher_gap(surface: RadialGraph, tol: float = DEFAULT_TOL) -> IdentityReport:
    fs = surface.frames
    H = fs.H
    i = int(np.argmin(H))
    if not H[i] > 0:
        raise PreconditionError(f"mean curvature {H[i]!r} is not positive at node {i}",
                                value=float(H[i]), location=i)
    flux = surface.ambient.inner_flux()
    lhs = integrate(surface, fs.conformal_f / H)
    rhs = (surface.n + 1) * enclosed_weighted_volume(surface, "f") + flux
    return _inequality("heintze_karcher", lhs, rhs, surface, tol, inner_flux=flux)


def michael_simon_ratio(surface: RadialGraph) -> IdentityReport:
    """``V(Sigma)^((n-1)/n) / int |H~| dv~``, an empirical lower bound for
    the Michael-Simon constant.

    ``V`` is measured in the space-form metric; ``H~`` and ``dv~`` belong
    to the same surface in the flat metric of the conformal model.  The
    extras carry the quantities ``V^(-(n+1)/n)`` and
    ``int |H~|^(n+1) dv~ / V~`` for the higher-power variant.
    """
    if not surface.is_space_form:
        raise GeometryError("the conformal Michael-Simon comparison needs a space form")
    n = surface.n
    V = surface.area
    flat = euclidean_model_surface(surface)
    Ht = np.abs(flat.frames.H)
    total = integrate(flat, Ht)
    if not total > 0:
        raise PreconditionError("flat mean curvature integrates to zero", value=total)
    lhs = V ** ((n - 1) / n)
    ratio = lhs / total
    hp = integrate(flat, Ht ** (n + 1)) / flat.area
    extras = {"volume": V, "flat_volume": flat.area, "volume_power": V ** (-(n + 1) / n),
              "flat_H_norm_power": hp, "higher_power_ratio": V ** (-(n + 1) / n) / hp}
    return IdentityReport("michael_simon", "report", lhs, total, ratio, 1.0,
                          bool(math.isfinite(ratio) and ratio > 0), surface.grid.degree, 0.0, extras)


def maclaurin_report(surface: RadialGraph, r_max: int | None = None, rtol: float = DEFAULT_TOL) -> IdentityReport:
    """Counts nodes whose Newton-Maclaurin chain up to ``r_max`` fails."""
    r_max = surface.n if r_max is None else r_max
    _check_r(surface, r_max)
    kappa = surface.frames.kappa
    bad = []
    for i, k in enumerate(kappa):
        chain = maclaurin_chain(k, r_max, rtol=rtol)
        if not chain.ok:
            bad.append(i)
    return IdentityReport(f"maclaurin_r{r_max}", "inequality", float(len(bad)), 0.0, -float(len(bad)),
                          1.0, not bad, surface.grid.degree, rtol,
                          {"violating_nodes": bad[:20], "nodes": int(kappa.shape[0])})


def identity_suite(surface: RadialGraph, tol: float = DEFAULT_TOL, r_values=None) -> list:
    """Every applicable check for one surface, in a fixed order."""
    n = surface.n
    out = [divergence_residual(surface, tol), minkowski_residual(surface, 1, tol)]
    rs = range(2, n + 1) if r_values is None else [r for r in r_values if r >= 2]
    for r in rs:
        if surface.is_space_form:
            out.append(minkowski_residual(surface, r, tol))
        else:
            out.append(generalized_minkowski_gap(surface, r, tol))
    out.append(heintze_karcher_gap(surface, tol))
    if surface.is_space_form:
        out.append(michael_simon_ratio(surface))
    if np.all(surface.frames.Hr(n) > 0):
        out.append(maclaurin_report(surface, n, tol))
    return out
