"""Ambient spaces: space forms and warped products ``dt^2 + h(t)^2 g_M``.

Both kinds expose the same polar description used by the hypersurface code:
a radial coordinate ``t``, a unit-speed fiber frame, the metric scale
``lam(t)`` multiplying the fiber metric, and the conformal data ``X = h d/dt``
with ``L_X g = 2 h'(t) g``.  A space form of curvature ``delta`` is the warped
product over the unit sphere with ``h = s_delta`` about a base point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import gamma

from .errors import DataError, DomainError, NumericError

__all__ = [
    "cdelta",
    "sdelta",
    "SpaceForm",
    "WarpedProduct",
    "ConditionResult",
    "ConditionReport",
    "check_warping_conditions",
    "geodesic_distance",
    "conformal_factor",
    "ConformalModel",
    "sphere_volume",
    "cosh_warping",
    "polynomial_warping",
    "tabulated_warping",
]


def sphere_volume(n: int) -> float:
    """Volume of the unit round sphere S^n."""
    return 2 * math.pi ** ((n + 1) / 2) / gamma((n + 1) / 2)


def _check_t(delta, t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("t must be nonnegative")
    if delta > 0 and np.any(t >= math.pi / math.sqrt(delta)):
        raise DomainError(f"t must be below pi/sqrt(delta) = {math.pi / math.sqrt(delta)}")
    return t


def _ret(x):
    return float(x) if np.ndim(x) == 0 else x


def cdelta(delta: float, t):
    """``c_delta(t)``: cos, 1 or cosh according to the sign of ``delta``."""
    t = _check_t(delta, t)
    if delta > 0:
        return _ret(np.cos(math.sqrt(delta) * t))
    if delta < 0:
        return _ret(np.cosh(math.sqrt(-delta) * t))
    return _ret(np.ones_like(t))


def sdelta(delta: float, t):
    """``s_delta(t)`` with ``s' = c_delta`` and ``s(0) = 0``."""
    t = _check_t(delta, t)
    if delta > 0:
        k = math.sqrt(delta)
        return _ret(np.sin(k * t) / k)
    if delta < 0:
        k = math.sqrt(-delta)
        return _ret(np.sinh(k * t) / k)
    return _ret(t.copy())


class _Polar:
    """Common polar interface; subclasses set ``n``, ``t_min``, ``t_max``."""

    n: int

    def warp(self, t):
        """``(h, h', h'')`` at ``t``."""
        raise NotImplementedError

    def fiber_scale(self) -> float:
        """Factor turning the fiber's unit model metric into ``g_M``."""
        return 1.0

    def lam(self, t):
        h, dh, d2h = self.warp(t)
        s = self.fiber_scale()
        return h * s, dh * s, d2h * s

    def fiber_volume(self) -> float:
        raise NotImplementedError

    def inner_flux(self) -> float:
        """Flux of ``X = h d/dt`` through the inner boundary ``{0} x M``."""
        h0 = float(self.warp(np.array(0.0))[0])
        lam0 = h0 * self.fiber_scale()
        return h0 * lam0 ** self.n * self.fiber_volume()


@dataclass(frozen=True)
class SpaceForm(_Polar):
    """Simply connected space form of sectional curvature ``delta`` and
    dimension ``n + 1``, described in geodesic polar coordinates about the
    origin of its conformal model (Euclidean space, the Poincare ball, or the
    stereographic image of the sphere)."""

    n: int
    delta: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be positive")

    @property
    def dim(self) -> int:
        return self.n + 1

    @property
    def kappa(self) -> float:
        return math.sqrt(abs(self.delta))

    @property
    def t_min(self) -> float:
        return 0.0

    @property
    def t_max(self) -> float:
        """Admissible geodesic radius: the open half-sphere for ``delta > 0``."""
        return math.pi / (2 * self.kappa) if self.delta > 0 else math.inf

    fiber = "sphere"

    def warp(self, t):
        t = np.asarray(t, dtype=float)
        s = sdelta(self.delta, t)
        return s, cdelta(self.delta, t), -self.delta * s

    def fiber_volume(self) -> float:
        return sphere_volume(self.n)

    # conformal model ----------------------------------------------------

    def model_radius(self, t):
        """Euclidean radius in the conformal model of the point at geodesic
        distance ``t`` from the origin, with first and second derivatives."""
        t = np.asarray(t, dtype=float)
        k = self.kappa
        if self.delta == 0:
            return t, np.ones_like(t), np.zeros_like(t)
        if self.delta < 0:
            th = np.tanh(k * t / 2)
            m = th / k
            dm = (1 - th ** 2) / 2
            d2m = -k * th * (1 - th ** 2) / 2
            return m, dm, d2m
        tn = np.tan(k * t / 2)
        m = tn / k
        dm = (1 + tn ** 2) / 2
        d2m = k * tn * (1 + tn ** 2) / 2
        return m, dm, d2m

    def to_model(self, t, directions):
        """Conformal-model coordinates of polar points ``(t, x)``."""
        m = np.asarray(self.model_radius(t)[0])
        return m[..., None] * np.asarray(directions, dtype=float)

    def conformal_factor(self, x):
        return conformal_factor(self.delta, x)

    def distance(self, p, q):
        return geodesic_distance(self, p, q)

    def _check_model(self, x):
        x = np.asarray(x, dtype=float)
        if not np.all(np.isfinite(x)):
            raise DomainError("non-finite model point")
        if self.delta < 0:
            r2 = np.einsum("...i,...i->...", x, x) * self.kappa ** 2
            if np.any(r2 >= 1):
                raise DomainError("point outside the Poincare ball")
        return x

    def lift(self, x):
        """Map model points to the hyperboloid / sphere / Euclidean space of
        unit curvature scale (``kappa * X``), for Karcher iterations."""
        x = self._check_model(x)
        if self.delta == 0:
            return x
        z = self.kappa * x
        z2 = np.einsum("...i,...i->...", z, z)[..., None]
        if self.delta < 0:
            return np.concatenate([(1 + z2) / (1 - z2), 2 * z / (1 - z2)], axis=-1)
        return np.concatenate([(1 - z2) / (1 + z2), 2 * z / (1 + z2)], axis=-1)

    def drop(self, X):
        X = np.asarray(X, dtype=float)
        if self.delta == 0:
            return X
        return X[..., 1:] / (1 + X[..., :1]) / self.kappa

    def karcher_mean(self, points, weights, start=None, tol=1e-10, max_iter=100):
        """Weighted Riemannian center of mass of model points."""
        pts = np.asarray(points, dtype=float)
        w = np.asarray(weights, dtype=float)
        w = w / w.sum()
        if self.delta == 0:
            return w @ pts
        Q = self.lift(pts)
        if start is None:
            start = w @ pts
            if self.delta < 0:
                rad = np.linalg.norm(start) * self.kappa
                if rad >= 1:
                    start = start / rad * 0.5
        P = self.lift(np.asarray(start, dtype=float))
        for _ in range(max_iter):
            V = w @ self._log(P, Q)
            P = self._exp(P, V)
            if self._norm(P, V) < tol:
                return self.drop(P)
        raise NumericError("Karcher mean iteration did not converge in %d steps" % max_iter)

    def _inner(self, a, b):
        if self.delta < 0:
            return -a[..., 0] * b[..., 0] + np.einsum("...i,...i->...", a[..., 1:], b[..., 1:])
        return np.einsum("...i,...i->...", a, b)

    def _norm(self, p, v):
        return math.sqrt(max(float(self._inner(v, v)), 0.0))

    def _log(self, p, Q):
        ip = self._inner(p, Q)
        if self.delta < 0:
            th = np.arccosh(np.maximum(-ip, 1.0))
            fac = np.where(th > 1e-12, th / np.sinh(np.where(th > 1e-12, th, 1.0)), 1.0)
            return fac[..., None] * (Q + ip[..., None] * p)
        th = np.arccos(np.clip(ip, -1.0, 1.0))
        fac = np.where(th > 1e-12, th / np.sin(np.where(th > 1e-12, th, 1.0)), 1.0)
        return fac[..., None] * (Q - ip[..., None] * p)

    def _exp(self, p, v):
        nv = self._norm(p, v)
        if nv < 1e-300:
            return p
        if self.delta < 0:
            out = math.cosh(nv) * p + math.sinh(nv) * v / nv
            return out / math.sqrt(-self._inner(out, out))
        out = math.cos(nv) * p + math.sin(nv) * v / nv
        return out / np.linalg.norm(out)


@dataclass(frozen=True)
class WarpedProduct(_Polar):
    """``[0, t0) x M`` with metric ``dt^2 + h(t)^2 g_M``.

    ``fiber`` is ``"sphere"`` (round sphere of curvature ``k > 0``) or
    ``"torus"`` (flat torus ``[0, torus_length)^n``, ``k = 0``).  ``h``,
    ``h_prime`` and ``h_second`` are vectorized callables.
    """

    n: int
    t0: float
    h: Callable
    h_prime: Callable
    h_second: Callable
    fiber: str = "sphere"
    k: float = 1.0
    torus_length: float = 2 * math.pi
    name: str = "custom"

    def __post_init__(self):
        if self.fiber not in ("sphere", "torus"):
            raise DomainError(f"unsupported fiber {self.fiber!r}")
        if self.fiber == "sphere" and not self.k > 0:
            raise DomainError("a round sphere fiber needs k > 0")
        if self.fiber == "torus" and self.k != 0:
            raise DomainError("a flat torus fiber has k = 0")
        if not self.t0 > 0:
            raise DomainError("t0 must be positive")

    @property
    def t_min(self) -> float:
        return 0.0

    @property
    def t_max(self) -> float:
        return self.t0

    def warp(self, t):
        t = np.asarray(t, dtype=float)
        return (np.asarray(self.h(t), dtype=float), np.asarray(self.h_prime(t), dtype=float),
                np.asarray(self.h_second(t), dtype=float))

    def fiber_scale(self) -> float:
        return 1.0 / math.sqrt(self.k) if self.fiber == "sphere" else 1.0

    def fiber_volume(self) -> float:
        if self.fiber == "sphere":
            return sphere_volume(self.n) * self.k ** (-self.n / 2)
        return self.torus_length ** self.n


def cosh_warping(n: int, t0: float = 2.0, k: float = 1.0, fiber: str = "sphere") -> WarpedProduct:
    return WarpedProduct(n, t0, np.cosh, np.sinh, np.cosh, fiber=fiber, k=k, name="cosh")


def polynomial_warping(n: int, coefficients, t0: float, k: float = 1.0,
                       fiber: str = "sphere") -> WarpedProduct:
    """``h(t) = sum_i c_i t^i`` (coefficients in increasing degree)."""
    p = np.polynomial.Polynomial(np.asarray(coefficients, dtype=float))
    dp, d2p = p.deriv(1), p.deriv(2)
    return WarpedProduct(n, t0, p, dp, d2p, fiber=fiber, k=k, name="polynomial")


def tabulated_warping(n: int, t_samples, h_samples, t0: float | None = None, k: float = 1.0,
                      fiber: str = "sphere") -> WarpedProduct:
    """Cubic-spline warping function through tabulated samples."""
    t = np.asarray(t_samples, dtype=float)
    hv = np.asarray(h_samples, dtype=float)
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(hv))):
        raise DataError("non-finite tabulated warping samples")
    spl = CubicSpline(t, hv)
    d1, d2 = spl.derivative(1), spl.derivative(2)
    return WarpedProduct(n, float(t[-1] if t0 is None else t0), spl, d1, d2, fiber=fiber, k=k,
                         name="tabulated")


# ---------------------------------------------------------------------------
# structural hypotheses on the warping function


@dataclass(frozen=True)
class ConditionResult:
    name: str
    passed: bool
    worst_margin: float
    location: float


@dataclass(frozen=True)
class ConditionReport:
    conditions: tuple
    grid_size: int

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def failed(self) -> list:
        return [c.name for c in self.conditions if not c.passed]

    def __getitem__(self, name) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)


def check_warping_conditions(w, grid_size: int = 256, fd_tol: float = 1e-6) -> ConditionReport:
    """Evaluate (H1)-(H4) for the warping function on a uniform grid.

    H1: ``h'(0) = 0`` and ``h''(0) > 0``.  H2: ``h' > 0`` on the open
    interval.  H3: ``2h''/h - (n-1)(k - h'^2)/h^2`` non-decreasing (adjacent
    differences).  H4: ``h''/h + (k - h'^2)/h^2 > 0``.  A fifth entry,
    ``consistency``, checks the supplied derivatives against central
    differences of ``h`` at ``fd_tol``.
    """
    if grid_size < 16:
        raise DomainError("grid_size must be at least 16")
    if isinstance(w, SpaceForm):
        sf = w
        w = WarpedProduct(sf.n, sf.t_max if math.isfinite(sf.t_max) else 10.0,
                          lambda t: sdelta(sf.delta, t), lambda t: cdelta(sf.delta, t),
                          lambda t: -sf.delta * np.asarray(sdelta(sf.delta, t)), k=1.0,
                          name=f"space form {sf.delta}")
    n, k = w.n, w.k
    t_end = w.t0 if math.isfinite(w.t0) else 10.0
    # open interval (0, t0): stay a grid step away from the right end
    t = np.linspace(0.0, t_end, grid_size + 1)[:-1]
    h, dh, d2h = w.warp(t)
    if not (np.all(np.isfinite(h)) and np.all(np.isfinite(dh)) and np.all(np.isfinite(d2h))):
        raise DataError("non-finite warping function values")
    scale = max(1.0, float(np.max(np.abs(h))))
    res = []

    flat_start = abs(float(dh[0])) <= 1e-12 * scale
    h1_margin = float(d2h[0]) if flat_start else -abs(float(dh[0]))
    res.append(ConditionResult("H1", flat_start and h1_margin > 0, h1_margin, 0.0))

    i2 = int(np.argmin(dh[1:])) + 1
    res.append(ConditionResult("H2", bool(dh[i2] > 0), float(dh[i2]), float(t[i2])))

    with np.errstate(divide="ignore", invalid="ignore"):
        q3 = 2 * d2h / h - (n - 1) * (k - dh ** 2) / h ** 2
        q4 = d2h / h + (k - dh ** 2) / h ** 2
    inner = slice(1, None)
    d3 = np.diff(q3[inner])
    tol3 = 1e-12 * max(1.0, float(np.max(np.abs(q3[inner]))))
    i3 = int(np.argmin(d3))
    res.append(ConditionResult("H3", bool(d3[i3] >= -tol3), float(d3[i3]), float(t[1 + i3])))
    i4 = int(np.argmin(q4[inner])) + 1
    res.append(ConditionResult("H4", bool(q4[i4] > 0), float(q4[i4]), float(t[i4])))

    step = 1e-4 * max(t_end, 1.0)
    tc = np.clip(t, step, t_end - step)
    hp, _, _ = w.warp(tc + step)
    hm, _, _ = w.warp(tc - step)
    h0, dh0, d2h0 = w.warp(tc)
    fd1 = (hp - hm) / (2 * step)
    fd2 = (hp - 2 * h0 + hm) / step ** 2
    err = np.maximum(np.abs(fd1 - dh0) / np.maximum(1, np.abs(dh0)),
                     np.abs(fd2 - d2h0) / np.maximum(1, np.abs(d2h0)))
    ic = int(np.argmax(err))
    res.append(ConditionResult("consistency", bool(err[ic] <= fd_tol), -float(err[ic]), float(tc[ic])))
    if not np.all(h[1:] > 0):
        raise DataError("warping function is not positive on (0, t0)")
    return ConditionReport(tuple(res), grid_size)


# ---------------------------------------------------------------------------
# distances and conformal factors in the conformal models


def geodesic_distance(sf: SpaceForm, p, q):
    """Space-form distance between points given in conformal-model
    coordinates (vectorized over leading axes)."""
    p = sf._check_model(p)
    q = sf._check_model(q)
    diff = np.linalg.norm(p - q, axis=-1)
    if sf.delta == 0:
        return _ret(diff)
    k = sf.kappa
    p2 = np.einsum("...i,...i->...", p, p) * k * k
    q2 = np.einsum("...i,...i->...", q, q) * k * k
    if sf.delta < 0:
        return _ret(2 / k * np.arcsinh(k * diff / np.sqrt((1 - p2) * (1 - q2))))
    chord_half = k * diff / np.sqrt((1 + p2) * (1 + q2))
    return _ret(2 / k * np.arctan2(chord_half, np.sqrt(np.maximum(1 - chord_half ** 2, 0.0))))


def conformal_factor(delta: float, x):
    """``phi(x)`` with the model metric ``exp(2 phi) |dx|^2`` of curvature
    ``delta``: 0, ``log(2/(1-|delta||x|^2))`` or ``log(2/(1+delta|x|^2))``."""
    x = np.asarray(x, dtype=float)
    r2 = np.einsum("...i,...i->...", x, x)
    if delta == 0:
        return _ret(np.zeros_like(r2))
    if delta < 0:
        if np.any(-delta * r2 >= 1):
            raise DomainError("point on or outside the boundary of the Poincare ball")
        return _ret(np.log(2 / (1 + delta * r2)))
    if np.any(delta * r2 >= 1):
        # |x| = 1/sqrt(delta) is the image of the equator of the half-sphere
        raise DomainError("point outside the stereographic image of the open half-sphere")
    return _ret(np.log(2 / (1 + delta * r2)))


@dataclass(frozen=True)
class ConformalModel:
    """``(D, exp(2 phi) |dx|^2)`` realizing the space form of curvature ``delta``."""

    delta: float
    n: int = 2

    @property
    def domain_radius(self) -> float:
        return math.inf if self.delta == 0 else 1 / math.sqrt(abs(self.delta))

    def phi(self, x):
        return conformal_factor(self.delta, x)

    def phi_sup(self, radius: float) -> float:
        """``sup |phi|`` over the closed Euclidean ball of the given radius."""
        if self.delta == 0:
            return 0.0
        vals = [abs(conformal_factor(self.delta, np.array([0.0]))),
                abs(conformal_factor(self.delta, np.array([radius])))]
        return float(max(vals))
