"""Anisotropic geometry in Euclidean space.

An anisotropy is a positive function ``F`` on the unit sphere with
``A_F = Hess F + F Id`` positive definite.  For a hypersurface with outward
normal ``nu`` the anisotropic shape operator is ``S_F = A_F(nu) o d nu``; its
eigenvalues are the anisotropic principal curvatures, computed from the
symmetric conjugate ``M^T S M`` with ``A_F = M M^T`` so that the spectrum is
real by construction.

The Wulff shape ``W_F`` is the image of ``x -> F(x) x + grad F(x)``; it has
support function ``F`` and all anisotropic principal curvatures equal to 1.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ambient import SpaceForm
from .errors import DataError, DomainError, GeometryError, PreconditionError
from .functions import (
    Affine,
    Constant,
    Coordinate,
    LinearCombination,
    Polynomial,
    Product,
    QuadraticFormPower,
    SmoothFunction,
    TranslatedSphereRadius,
)
from .grid import SphericalGrid, build_grid
from .hypersurface import RadialGraph, enclosed_weighted_volume, integrate, surface_norm
from .identities import DEFAULT_TOL, IdentityReport
from .symfun import hr_all, maclaurin_chain, umbilicity_defect
from .weingarten import WeingartenSpec, fit_power_law

__all__ = [
    "AnisotropyFunction",
    "AnisoFrame",
    "AnisoFrameSet",
    "WulffShape",
    "AnisoSweepRecord",
    "AnisoSweepResult",
    "constant_anisotropy",
    "linear_anisotropy",
    "ellipsoidal_anisotropy",
    "convexity_margin",
    "anisotropy_matrix",
    "wulff_map",
    "wulff_shape",
    "aniso_frame",
    "aniso_frames",
    "aniso_maclaurin",
    "aniso_minkowski_residual",
    "aniso_hk_gap",
    "aniso_stability_sweep",
]


@dataclass(frozen=True)
class AnisotropyFunction:
    """``F`` on ``S^n`` through a smooth extension to ``R^{n+1}``.

    ``wulff_radius`` is the radial function of the Wulff shape about the
    origin when it is known in closed form.
    """

    F: SmoothFunction
    name: str = "custom"
    wulff_radius: SmoothFunction | None = None
    smoothness: int = 2

    def evaluate(self, x):
        return self.F.evaluate(np.atleast_2d(np.asarray(x, dtype=float)))

    def __call__(self, x):
        return self.evaluate(x)[0]


def constant_anisotropy(c: float = 1.0) -> AnisotropyFunction:
    if not c > 0:
        raise DomainError("a constant anisotropy must be positive")
    return AnisotropyFunction(Constant(float(c)), f"constant {c}", Constant(float(c)))


def linear_anisotropy(v, n: int = 2) -> AnisotropyFunction:
    """``1 + v.x``; its Wulff shape is the unit sphere translated by ``v``."""
    v = np.asarray(v, dtype=float)
    if v.size != n + 1:
        raise DomainError(f"v needs {n + 1} components")
    if np.linalg.norm(v) >= 1:
        raise DomainError("|v| < 1 is needed for F > 0")
    terms = [(1.0, (0,) * (n + 1))] + [(float(c), tuple(int(i == j) for i in range(n + 1)))
                                      for j, c in enumerate(v) if c != 0]
    return AnisotropyFunction(Polynomial.from_terms(terms), f"linear {tuple(v)}",
                              TranslatedSphereRadius(tuple(v), 1.0))


def ellipsoidal_anisotropy(Q) -> AnisotropyFunction:
    """``sqrt(x.Qx)``: the support function of the ellipsoid ``y.Q^{-1}y = 1``."""
    Q = np.asarray(Q, dtype=float)
    if Q.ndim == 1:
        Q = np.diag(Q)
    Q = 0.5 * (Q + Q.T)
    if np.min(np.linalg.eigvalsh(Q)) <= 0:
        raise DomainError("Q must be positive definite")
    return AnisotropyFunction(QuadraticFormPower.of(Q, 0.5), "ellipsoidal",
                              QuadraticFormPower.of(np.linalg.inv(Q), -0.5))


def _sphere_derivs(F: AnisotropyFunction, x: np.ndarray):
    """Value, spherical gradient (ambient vector) and ambient-form spherical
    Hessian ``P D2F P - (x.DF) P`` at unit vectors ``x``."""
    v, g, h = F.evaluate(x)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(g)) and np.all(np.isfinite(h))):
        bad = ~(np.isfinite(v) & np.isfinite(g).all(1) & np.isfinite(h).reshape(len(v), -1).all(1))
        raise DataError("non-finite anisotropy derivatives", location=int(np.argmax(bad)))
    d = x.shape[1]
    radial = np.einsum("ni,ni->n", x, g)
    P = np.eye(d)[None] - np.einsum("ni,nj->nij", x, x)
    grad = g - radial[:, None] * x
    hess = np.einsum("nij,njk,nkl->nil", P, h, P) - radial[:, None, None] * P
    return v, grad, hess, P


def anisotropy_matrix(F: AnisotropyFunction, x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """``A_F(x)`` in the orthonormal tangent ``basis`` (shape (N, n+1, n))."""
    v, _, hess, _ = _sphere_derivs(F, x)
    A = np.einsum("nik,nij,njl->nkl", basis, hess, basis) + v[:, None, None] * np.eye(basis.shape[2])[None]
    return 0.5 * (A + np.swapaxes(A, 1, 2))


def convexity_margin(F: AnisotropyFunction, grid: SphericalGrid) -> float:
    """Minimum eigenvalue of ``A_F`` over the grid nodes."""
    A = anisotropy_matrix(F, grid.nodes, grid.frames)
    return float(np.min(np.linalg.eigvalsh(A)))


def wulff_map(F: AnisotropyFunction, x) -> np.ndarray:
    """``F(x) x + grad F(x)`` for unit vectors ``x`` (vectorized)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    v, grad, _, _ = _sphere_derivs(F, x)
    out = v[:, None] * x + grad
    return out[0] if out.shape[0] == 1 else out


@dataclass(frozen=True, eq=False)
class WulffShape:
    generator: AnisotropyFunction
    samples: np.ndarray = field(repr=False)
    volume: float
    rho: float
    surface: RadialGraph | None = field(default=None, repr=False)


def wulff_shape(F: AnisotropyFunction, n: int = 2, degree: int = 40, rho: float = 1.0,
                check_tol: float = 1e-9) -> WulffShape:
    """Samples of ``rho W_F`` on the grid, with the area (``volume``) of the
    hypersurface and, when a closed-form radial function is known, the
    corresponding :class:`RadialGraph`.

    Raises GeometryError when the sampled Wulff map folds (two grid nodes
    with nearly equal images, or a degenerate differential).
    """
    grid = build_grid(n, degree)
    if convexity_margin(F, grid) <= 0:
        raise PreconditionError("anisotropy fails the convexity condition")
    pts = rho * wulff_map(F, grid.nodes)
    A = anisotropy_matrix(F, grid.nodes, grid.frames)
    jac = np.linalg.det(A) * rho ** n
    if np.min(jac) <= check_tol:
        raise GeometryError("degenerate Wulff map differential", location=int(np.argmin(jac)))
    surf = None
    if F.wulff_radius is not None:
        surf = RadialGraph(SpaceForm(n, 0.0), Affine(F.wulff_radius, 0.0, rho), grid, f"Wulff shape ({F.name})")
        vol = surf.area
    else:
        vol = float(np.sum(jac * grid.weights))
    return WulffShape(F, pts, vol, rho, surf)


@dataclass(frozen=True)
class AnisoFrame:
    SF: np.ndarray
    kappaF: tuple
    HrF: tuple
    tauF_sq: float


@dataclass(frozen=True, eq=False)
class AnisoFrameSet:
    SF: np.ndarray
    kappaF: np.ndarray
    HrF: np.ndarray
    tauF_sq: np.ndarray
    F_nu: np.ndarray

    def __getitem__(self, i) -> AnisoFrame:
        return AnisoFrame(self.SF[i], tuple(self.kappaF[i]), tuple(self.HrF[i]), float(self.tauF_sq[i]))

    def __len__(self):
        return self.SF.shape[0]

    @property
    def HF(self) -> np.ndarray:
        return self.HrF[:, 1]


def _require_flat(surface: RadialGraph):
    amb = surface.ambient
    if not (isinstance(amb, SpaceForm) and amb.delta == 0):
        raise GeometryError("anisotropic quantities are defined for Euclidean hypersurfaces")


def _tangent_basis(surface: RadialGraph):
    """Orthonormal tangent basis ``Q`` (N, n+1, n) of the surface together with
    the Cholesky factor ``L`` of the induced metric in the graph frame."""
    fs = surface.frames
    u = fs.u
    nodes = surface.grid.nodes
    E = surface.grid.frames
    # d X(y) along frame direction k: du_k y + u E_k
    J = np.einsum("nk,ni->nik", fs.du, nodes) + u[:, None, None] * E
    L = np.linalg.cholesky(fs.metric)
    Q = np.swapaxes(np.linalg.solve(L, np.swapaxes(J, 1, 2)), 1, 2)
    return Q, L


def aniso_frames(surface: RadialGraph, F: AnisotropyFunction) -> AnisoFrameSet:
    _require_flat(surface)
    fs = surface.frames
    Q, L = _tangent_basis(surface)
    S = np.linalg.solve(L, np.swapaxes(np.linalg.solve(L, fs.second_form), 1, 2))
    S = 0.5 * (S + np.swapaxes(S, 1, 2))
    nu = fs.normal
    A = anisotropy_matrix(F, nu, Q)
    try:
        M = np.linalg.cholesky(A)
    except np.linalg.LinAlgError as exc:
        lam = np.linalg.eigvalsh(A)[:, 0]
        raise GeometryError("anisotropy is not convex at a surface normal",
                            location=int(np.argmin(lam))) from exc
    C = np.einsum("nki,nkl,nlj->nij", M, S, M)
    kF = np.linalg.eigvalsh(0.5 * (C + np.swapaxes(C, 1, 2)))
    SF = np.einsum("nik,nkj->nij", A, S)
    F_nu = F.evaluate(nu)[0]
    return AnisoFrameSet(SF, kF, hr_all(kF), umbilicity_defect(kF), F_nu)


def aniso_frame(surface: RadialGraph, F: AnisotropyFunction, node: int | None = None):
    """Per-node anisotropic frames; a single :class:`AnisoFrame` when
    ``node`` is given."""
    frames = aniso_frames(surface, F)
    return frames if node is None else frames[node]


def aniso_maclaurin(frame: AnisoFrame, r: int, rtol: float = 1e-10):
    k = np.asarray(frame.kappaF)
    if r + 1 <= k.size and frame.HrF[r + 1] <= 0:
        raise PreconditionError(f"H^F_{r + 1} is not positive", value=float(frame.HrF[r + 1]))
    return maclaurin_chain(k, r, rtol=rtol)


def _report(name, kind, lhs, rhs, surface, tol, **extras):
    val = lhs - rhs
    scale = abs(lhs) + abs(rhs)
    ok = abs(val) <= tol * scale if kind == "identity" else val >= -tol * scale
    return IdentityReport(name, kind, lhs, rhs, val, scale, bool(ok), surface.grid.degree, tol, extras)


def aniso_minkowski_residual(surface: RadialGraph, F: AnisotropyFunction, r: int,
                             tol: float = DEFAULT_TOL) -> IdentityReport:
    """``int F(nu) H_r^F`` against ``int H_{r+1}^F <X, nu>``, ``r`` in ``0..n-1``."""
    if not 0 <= r <= surface.n - 1:
        raise DomainError(f"r={r} outside [0, {surface.n - 1}]")
    af = aniso_frames(surface, F)
    fs = surface.frames
    lhs = integrate(surface, af.F_nu * af.HrF[:, r])
    rhs = integrate(surface, af.HrF[:, r + 1] * fs.support)
    return _report(f"aniso_minkowski_r{r}", "identity", lhs, rhs, surface, tol, r=r)


def aniso_hk_gap(surface: RadialGraph, F: AnisotropyFunction, tol: float = DEFAULT_TOL) -> IdentityReport:
    """``int F(nu)/H^F - (n+1) V(Omega)``."""
    af = aniso_frames(surface, F)
    HF = af.HF
    i = int(np.argmin(HF))
    if not HF[i] > 0:
        raise PreconditionError(f"H^F = {HF[i]!r} is not positive at node {i}", value=float(HF[i]), location=i)
    lhs = integrate(surface, af.F_nu / HF)
    rhs = (surface.n + 1) * enclosed_weighted_volume(surface, "one")
    return _report("aniso_heintze_karcher", "inequality", lhs, rhs, surface, tol)


@dataclass(frozen=True)
class AnisoSweepRecord:
    t: float
    eps_l2: float
    w22_norm: float
    rho: float
    tauF_l2_sq: float


@dataclass(frozen=True)
class AnisoSweepResult:
    records: tuple
    ratio_min: float
    ratio_max: float
    slope: float
    ratio_bound: float
    degenerate_p_clause: str

    @property
    def bounded(self) -> bool:
        return bool(np.isfinite(self.ratio_max) and self.ratio_min > 0
                    and self.ratio_max / self.ratio_min <= self.ratio_bound)

    @property
    def co_vanishing(self) -> bool:
        e = [r.eps_l2 for r in self.records]
        w = [r.w22_norm for r in self.records]
        return bool(np.all(np.diff(e) < 0) and np.all(np.diff(w) < 0))

    def __iter__(self):
        return iter((list(self.records), self.ratio_min, self.ratio_max))


def _w22_proxy(surface: RadialGraph, wulff_radius: SmoothFunction, rho: float) -> float:
    """Normalized ``W^{2,2}`` norm on ``W_{rho F}`` of ``psi - Id - c0``, where
    ``psi`` maps ``rho r_W(x) x`` to ``r_M(x) x`` along rays."""
    grid = surface.grid
    W = RadialGraph(surface.ambient, Affine(wulff_radius, 0.0, rho), grid, "scaled Wulff shape")
    meas = W.measure
    area = meas.sum()
    g = LinearCombination(((1.0, surface.radius), (-rho, wulff_radius)))
    total = 0.0
    comps = []
    for j in range(grid.nodes.shape[1]):
        v, dv, ddv = grid.intrinsic(Product(g, Coordinate(j)))
        comps.append((v, dv, ddv))
    c0 = np.array([float(np.sum(v * meas) / area) for v, _, _ in comps])
    for (v, dv, ddv), c in zip(comps, c0):
        total += np.sum(((v - c) ** 2 + np.einsum("ni,ni->n", dv, dv)
                         + np.einsum("nij,nij->n", ddv, ddv)) * meas)
    return math.sqrt(total / area)


def aniso_stability_sweep(family: Callable[[float], RadialGraph], F: AnisotropyFunction,
                          spec: WeingartenSpec, t_values: Sequence[float],
                          ratio_bound: float = 10.0) -> AnisoSweepResult:
    """Wulff-proximity sweep.

    ``family(t)`` must be a Euclidean radial graph about the Wulff center,
    with ``family(0)`` a scaled Wulff shape.  For each ``t`` the record holds
    ``|eps|_2`` with ``eps = H_r^F - a H^F - b``, the scale
    ``rho = (V(M)/V(W_F))^(1/n)``, the ``W^{2,2}`` proxy and ``int |tau_F|^2``.
    """
    if F.wulff_radius is None:
        raise DomainError("the sweep needs a closed-form Wulff radial function")
    t = np.asarray(t_values, dtype=float)
    if t.size < 2 or np.any(t <= 0) or np.any(np.diff(t) >= 0):
        raise DomainError("t_values must be positive and strictly decreasing with at least two entries")
    records = []
    ref = None
    for tv in t:
        M = family(float(tv))
        _require_flat(M)
        if ref is None:
            ref = RadialGraph(M.ambient, F.wulff_radius, M.grid).area
        af = aniso_frames(M, F)
        eps = af.HrF[:, spec.r] - spec.a * af.HF - spec.b
        rho = (M.area / ref) ** (1 / M.n)
        w22 = _w22_proxy(M, F.wulff_radius, rho)
        records.append(AnisoSweepRecord(float(tv), surface_norm(M, eps, 2), w22, rho,
                                        integrate(M, af.tauF_sq)))
    ratios = np.array([r.w22_norm / r.eps_l2 for r in records])
    slope = fit_power_law([r.eps_l2 for r in records], [r.w22_norm for r in records])[0]
    clause = ("for p = 2 <= n the small-traceless-part hypothesis can be dropped"
              if 2 <= M.n else "")
    return AnisoSweepResult(tuple(records), float(ratios.min()), float(ratios.max()), slope,
                            ratio_bound, clause)
