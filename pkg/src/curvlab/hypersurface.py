"""Closed star-shaped hypersurfaces given as graphs over the fiber.

A surface is ``{(u(y), y)}`` in polar coordinates ``(t, y)`` of a space form
or warped product, with ``u`` a smooth function on the fiber.  With the
fiber frame orthonormal for its unit metric and ``lam = h * fiber_scale``,
the extrinsic geometry at a node is

    g = lam^2 I + du du^T
    W = sqrt(1 + |du|^2 / lam^2)
    B = (lam lam' I + 2 (lam'/lam) du du^T - Hess u) / W

with respect to the outward normal ``nu = (d_t - lam^-2 grad u) / W``, so
that round spheres have positive principal curvatures.  The support function
is ``<X, nu> = h / W`` for ``X = h d/dt``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.optimize import minimize
from scipy.special import roots_legendre

from .ambient import SpaceForm, WarpedProduct
from .errors import DataError, GeometryError, NumericError
from .functions import Compose, Polynomial, SmoothFunction
from .grid import SphericalGrid, TorusGrid, build_grid
from .symfun import CurvatureVector, hr_all, umbilicity_defect

__all__ = [
    "RadialGraph",
    "PointFrame",
    "FrameSet",
    "GeometricSummary",
    "SphereFit",
    "SliceFit",
    "frame_at",
    "integrate",
    "enclosed_weighted_volume",
    "starshape_margin",
    "geometric_summary",
    "best_fit_geodesic_sphere",
    "best_fit_slice",
    "hausdorff_to_sphere",
    "hausdorff_to_slice",
    "surface_norm",
    "euclidean_model_surface",
    "tabulated_radius",
    "read_radius_csv",
]


@dataclass(frozen=True)
class PointFrame:
    metric: np.ndarray
    second_form: np.ndarray
    normal: np.ndarray
    kappa: CurvatureVector
    support: float
    conformal_f: float


@dataclass(frozen=True, eq=False)
class FrameSet:
    """Per-node geometry of a surface, as stacked arrays."""

    u: np.ndarray
    du: np.ndarray
    metric: np.ndarray
    second_form: np.ndarray
    normal: np.ndarray
    kappa: np.ndarray
    support: np.ndarray
    conformal_f: np.ndarray
    area_element: np.ndarray
    hr: np.ndarray = field(repr=False)

    @property
    def H(self) -> np.ndarray:
        return self.hr[:, 1]

    def Hr(self, r: int) -> np.ndarray:
        return self.hr[:, r]

    @property
    def tau2(self) -> np.ndarray:
        return umbilicity_defect(self.kappa)

    @property
    def B_norm(self) -> np.ndarray:
        return np.sqrt(np.einsum("ni,ni->n", self.kappa, self.kappa))


@dataclass(frozen=True, eq=False)
class RadialGraph:
    """Closed hypersurface ``t = u(y)`` over the fiber of ``ambient``."""

    ambient: SpaceForm | WarpedProduct
    radius: SmoothFunction
    grid: SphericalGrid | TorusGrid
    label: str = ""

    def __post_init__(self):
        if self.grid.n != self.ambient.n:
            raise GeometryError(f"grid dimension {self.grid.n} != ambient n {self.ambient.n}")
        if self.grid.fiber != self.ambient.fiber:
            raise GeometryError(f"{self.grid.fiber} grid over a {self.ambient.fiber} fiber")

    @classmethod
    def build(cls, ambient, radius, degree: int = 40, label: str = "") -> "RadialGraph":
        if ambient.fiber == "torus":
            from .grid import build_torus_grid
            grid = build_torus_grid(ambient.n, degree, ambient.torus_length)
        else:
            grid = build_grid(ambient.n, degree)
        return cls(ambient, radius, grid, label)

    @property
    def n(self) -> int:
        return self.ambient.n

    @property
    def is_space_form(self) -> bool:
        return isinstance(self.ambient, SpaceForm)

    def with_grid(self, degree: int) -> "RadialGraph":
        return RadialGraph.build(self.ambient, self.radius, degree, self.label)

    @cached_property
    def raw(self):
        u, du, ddu = self.grid.intrinsic(self.radius)
        for name, arr in (("radius", u), ("gradient", du), ("Hessian", ddu)):
            bad = ~np.isfinite(arr.reshape(arr.shape[0], -1)).all(axis=1)
            if bad.any():
                raise DataError(f"non-finite {name} of the graph function", location=int(np.argmax(bad)))
        return u, du, ddu

    @cached_property
    def frames(self) -> FrameSet:
        u, du, ddu = self.raw
        amb = self.ambient
        lo = np.argmin(u)
        hi = np.argmax(u)
        if u[lo] <= amb.t_min:
            raise GeometryError(f"graph leaves the domain: u = {u[lo]!r} <= {amb.t_min}", location=int(lo))
        if u[hi] >= amb.t_max:
            raise GeometryError(f"graph leaves the domain: u = {u[hi]!r} >= {amb.t_max}", location=int(hi))
        n = self.n
        h, dh, _ = amb.warp(u)
        lam, dlam, _ = amb.lam(u)
        eye = np.eye(n)[None]
        dudu = np.einsum("ni,nj->nij", du, du)
        grad2 = np.einsum("ni,ni->n", du, du)
        W = np.sqrt(1 + grad2 / lam ** 2)
        g = lam[:, None, None] ** 2 * eye + dudu
        B = ((lam * dlam)[:, None, None] * eye + (2 * dlam / lam)[:, None, None] * dudu - ddu) / W[:, None, None]
        B = 0.5 * (B + np.swapaxes(B, 1, 2))
        try:
            L = np.linalg.cholesky(g)
        except np.linalg.LinAlgError as exc:
            raise GeometryError("degenerate induced metric") from exc
        X = np.linalg.solve(L, B)
        S = np.linalg.solve(L, np.swapaxes(X, 1, 2))
        S = 0.5 * (S + np.swapaxes(S, 1, 2))
        kappa = np.linalg.eigvalsh(S)
        if self.grid.fiber == "sphere":
            normal = (self.grid.nodes / W[:, None]
                      - np.einsum("nik,nk->ni", self.grid.frames, du) / (lam * W)[:, None])
        else:
            normal = np.concatenate([(1 / W)[:, None], -du / (lam * W)[:, None]], axis=1)
        return FrameSet(
            u=u, du=du, metric=g, second_form=B, normal=normal, kappa=kappa,
            support=h / W, conformal_f=np.asarray(dh, dtype=float) * np.ones_like(u),
            area_element=lam ** n * W, hr=hr_all(kappa),
        )

    @property
    def measure(self) -> np.ndarray:
        """Quadrature weights times area element (the surface measure)."""
        return self.grid.weights * self.frames.area_element

    @cached_property
    def area(self) -> float:
        return float(np.sum(self.measure))

    def model_points(self) -> np.ndarray:
        """Node positions in the conformal model (space forms only)."""
        if not self.is_space_form:
            raise GeometryError("model points exist for space forms only")
        return self.ambient.to_model(self.raw[0], self.grid.nodes)


def frame_at(surface: RadialGraph, node: int) -> PointFrame:
    fs = surface.frames
    return PointFrame(fs.metric[node], fs.second_form[node], fs.normal[node],
                      CurvatureVector(fs.kappa[node]), float(fs.support[node]),
                      float(fs.conformal_f[node]))


def integrate(surface: RadialGraph, field) -> float:
    """``int_Sigma field dv_g``; ``field`` is a node array or a callable of
    the surface's FrameSet."""
    vals = field(surface.frames) if callable(field) else field
    vals = np.broadcast_to(np.asarray(vals, dtype=float), (surface.grid.size,))
    bad = ~np.isfinite(vals)
    if bad.any():
        i = int(np.argmax(bad))
        raise DataError(f"non-finite integrand at node {i}", location=i)
    return float(np.sum(vals * surface.measure))


def surface_norm(surface: RadialGraph, values, p: float) -> float:
    """Volume-normalized ``L^p`` norm ``((1/V) int |f|^p)^(1/p)``; ``p=inf``
    gives the max over nodes."""
    vals = np.abs(np.asarray(values, dtype=float))
    if math.isinf(p):
        return float(vals.max())
    return (integrate(surface, vals ** p) / surface.area) ** (1 / p)


def enclosed_weighted_volume(surface: RadialGraph, weight="one", radial_nodes: int = 64) -> float:
    """``int_Omega weight`` over ``Omega = {0 <= t < u(y)}``.

    ``weight`` is ``"one"``, ``"f"`` (``h'(t)``) or a callable
    ``weight(t, nodes)`` with ``t`` of shape (N, m) and ``nodes`` of shape
    (N, 1, d); integration uses Gauss-Legendre along each ray against the
    volume density ``lam(t)^n``.
    """
    u = surface.raw[0]
    amb = surface.ambient
    if np.any(u <= amb.t_min):
        i = int(np.argmin(u))
        raise GeometryError("the ray from the center misses the surface: not star-shaped", location=i)
    s, w = roots_legendre(radial_nodes)
    t = u[:, None] * (1 + s[None, :]) / 2
    lam = amb.lam(t)[0]
    dens = lam ** surface.n
    if weight == "one":
        wt = np.ones_like(t)
    elif weight == "f":
        wt = amb.warp(t)[1]
    else:
        wt = np.asarray(weight(t, surface.grid.nodes[:, None, :]), dtype=float)
    radial = np.sum(wt * dens * w[None, :], axis=1) * u / 2
    return float(np.sum(radial * surface.grid.weights))


def starshape_margin(surface: RadialGraph) -> float:
    """Minimum of the support function ``<X, nu>`` over the nodes.

    When the graph function is not positive somewhere, the rays from the
    center do not all meet the surface; the (nonpositive) minimum of ``u``
    is returned instead.
    """
    u = surface.raw[0]
    if np.min(u) <= surface.ambient.t_min:
        return float(np.min(u) - surface.ambient.t_min)
    return float(np.min(surface.frames.support))


@dataclass(frozen=True)
class GeometricSummary:
    area: float
    enclosed_volume: float
    weighted_enclosed: float
    extrinsic_radius: float
    center: np.ndarray | None
    B_sup_norm: float
    B_spectral_sup: float


def geometric_summary(surface: RadialGraph) -> GeometricSummary:
    """Area, enclosed volumes, center of mass, extrinsic radius, ``|B|_inf``.

    ``|B|_inf`` is the maximum over nodes of ``sqrt(sum k_i^2)`` (the norm
    that dominates the traceless part); the largest ``|k_i|`` is reported as
    ``B_spectral_sup``.  The center
    is the Riemannian center of mass of the surface measure (space forms);
    for warped products ``center`` is None and the radius is ``max u``.
    """
    fs = surface.frames
    area = surface.area
    vol = enclosed_weighted_volume(surface, "one")
    wvol = enclosed_weighted_volume(surface, "f")
    bsup = float(fs.B_norm.max())
    if surface.is_space_form:
        pts = surface.model_points()
        center = surface.ambient.karcher_mean(pts, surface.measure)
        R = float(np.max(surface.ambient.distance(center[None, :], pts)))
    else:
        center = None
        R = float(fs.u.max())
    return GeometricSummary(area, vol, wvol, R, center, bsup, float(np.abs(fs.kappa).max()))


@dataclass(frozen=True)
class SphereFit:
    center: np.ndarray
    rho0: float
    residual: float
    converged: bool


def best_fit_geodesic_sphere(surface: RadialGraph, tol: float = 1e-13) -> SphereFit:
    """Least-squares geodesic sphere: minimize the measure-weighted mean of
    ``(d(c, x) - rho)^2``; ``rho`` is eliminated in closed form and the
    center refined by Nelder-Mead from the center of mass."""
    if not surface.is_space_form:
        raise GeometryError("geodesic spheres are fitted in space forms only")
    sf = surface.ambient
    pts = surface.model_points()
    w = surface.measure / surface.measure.sum()

    def rho_and_res(c):
        try:
            d = sf.distance(c[None, :], pts)
        except Exception:
            return math.nan, math.inf
        rho = float(w @ d)
        return rho, float(w @ (d - rho) ** 2)

    start = sf.karcher_mean(pts, w)
    scale = max(float(np.max(np.linalg.norm(pts, axis=1))), 1e-3)
    r0 = rho_and_res(start)[1]
    converged = True
    best = start
    if r0 > 0:
        simplex = np.vstack([start] + [start + 1e-3 * scale * e for e in np.eye(start.size)])
        res = minimize(lambda c: rho_and_res(c)[1], start, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": tol * scale,
                                "fatol": 1e-30, "maxiter": 20000, "maxfev": 40000})
        converged = bool(res.success)
        if res.fun <= r0:
            best = res.x
    rho, res2 = rho_and_res(best)
    return SphereFit(np.asarray(best), rho, math.sqrt(max(res2, 0.0)), converged)


@dataclass(frozen=True)
class SliceFit:
    t1: float
    residual: float


def best_fit_slice(surface: RadialGraph) -> SliceFit:
    """Closest slice ``{t1} x M`` in the measure-weighted least-squares sense."""
    u = surface.raw[0]
    w = surface.measure / surface.measure.sum()
    t1 = float(w @ u)
    return SliceFit(t1, math.sqrt(float(w @ (u - t1) ** 2)))


def hausdorff_to_sphere(surface: RadialGraph, center, rho0: float) -> float:
    """``max_nodes |d(center, x) - rho0|``."""
    if not rho0 > 0:
        raise GeometryError("sphere radius must be positive")
    d = surface.ambient.distance(np.asarray(center, dtype=float)[None, :], surface.model_points())
    return float(np.max(np.abs(d - rho0)))


def hausdorff_to_slice(surface: RadialGraph, t1: float) -> float:
    return float(np.max(np.abs(surface.raw[0] - t1)))


def euclidean_model_surface(surface: RadialGraph) -> RadialGraph:
    """The same surface seen in the flat metric of the conformal model."""
    sf = surface.ambient
    if not isinstance(sf, SpaceForm):
        raise GeometryError("conformal models exist for space forms only")
    flat = SpaceForm(sf.n, 0.0)
    radius = Compose(surface.radius, sf.model_radius)
    return RadialGraph(flat, radius, surface.grid, surface.label + " (flat model)")


def _monomials(d: int, degree: int):
    if d == 1:
        return [(degree,)]
    return [(k,) + rest for k in range(degree, -1, -1) for rest in _monomials(d - 1, degree - k)]


def tabulated_radius(grid: SphericalGrid, values, max_degree: int | None = None) -> Polynomial:
    """Spherical-polynomial fit of radius samples given at the grid nodes.

    Monomials of degree exactly ``D`` and ``D - 1`` form a basis of the
    spherical polynomials of degree ``<= D``; the coefficients come from
    quadrature-weighted least squares, which is the exact spectral projection
    when ``2D <= grid.degree``.
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape != (grid.size,):
        raise DataError(f"expected {grid.size} radius samples, got {vals.shape}")
    bad = ~np.isfinite(vals)
    if bad.any():
        raise DataError("non-finite radius sample", location=int(np.argmax(bad)))
    D = min(grid.degree // 2, 12) if max_degree is None else int(max_degree)
    d = grid.nodes.shape[1]
    exps = _monomials(d, D) + (_monomials(d, D - 1) if D >= 1 else [])
    basis = np.stack([np.prod(grid.nodes ** np.asarray(e), axis=1) for e in exps], axis=1)
    sw = np.sqrt(grid.weights)
    coef = np.linalg.lstsq(basis * sw[:, None], vals * sw, rcond=1e-13)[0]
    return Polynomial(tuple((float(c), tuple(e)) for c, e in zip(coef, exps) if c != 0.0))


def read_radius_csv(path, grid: SphericalGrid) -> np.ndarray:
    """Radius samples from a CSV whose header names the grid index columns
    followed by ``radius``; rows may come in any order but must cover the
    grid exactly once."""
    import csv

    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header[-1] != "radius" or len(header) != grid.index.shape[1] + 1:
        raise DataError(f"{path}: header must be {grid.index.shape[1]} index columns then 'radius'")
    lookup = {tuple(int(v) for v in idx): k for k, idx in enumerate(grid.index)}
    out = np.full(grid.size, np.nan)
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            key = tuple(int(v) for v in row[:-1])
            val = float(row[-1])
        except ValueError as exc:
            raise DataError(f"{path}:{line}: malformed row", location=line) from exc
        if key not in lookup:
            raise DataError(f"{path}:{line}: index {key} not on the grid", location=line)
        if not np.isnan(out[lookup[key]]):
            raise DataError(f"{path}:{line}: duplicate index {key}", location=line)
        out[lookup[key]] = val
    if np.isnan(out).any():
        raise DataError(f"{path}: {int(np.isnan(out).sum())} grid nodes missing")
    return out
