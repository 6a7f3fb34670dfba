"""Product quadrature grids on the unit sphere S^n and on flat tori.

On S^n the hyperspherical angles are integrated with Gauss-Gegenbauer rules
in ``cos(theta_k)`` (Gauss-Legendre for the last polar angle) and the
azimuth with the trapezoidal rule, so spherical polynomials up to the grid
degree are integrated exactly.  All nodes are interior: the poles of the
parametrization are never sampled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_gegenbauer, roots_legendre

from .ambient import sphere_volume
from .errors import DomainError

__all__ = ["SphericalGrid", "TorusGrid", "build_grid", "build_torus_grid"]


def _polar_rule(m: int, k: int):
    """Nodes/weights in s = cos(theta) for the weight (1 - s^2)^((k-2)/2)."""
    if k == 2:
        return roots_legendre(m)
    return roots_gegenbauer(m, (k - 1) / 2)


def _householder_frames(x: np.ndarray) -> np.ndarray:
    """Orthonormal bases of the tangent spaces ``x^perp`` (shape (N, d, d-1))."""
    N, d = x.shape
    s = np.where(x[:, -1] >= 0, 1.0, -1.0)
    v = x.copy()
    v[:, -1] += s
    H = np.eye(d)[None] - 2 * np.einsum("ni,nj->nij", v, v) / np.einsum("ni,ni->n", v, v)[:, None, None]
    return H[:, :, : d - 1]


@dataclass(frozen=True, eq=False)
class SphericalGrid:
    """Quadrature nodes on the unit sphere with tangent frames."""

    n: int
    degree: int
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    frames: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    fiber: str = "sphere"

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def directions(self) -> np.ndarray:
        return self.nodes

    @property
    def volume(self) -> float:
        return sphere_volume(self.n)

    def integrate(self, values) -> float:
        return float(np.sum(np.asarray(values) * self.weights))

    def intrinsic(self, func):
        """Value, covariant gradient ``(N, n)`` and covariant Hessian
        ``(N, n, n)`` of a sphere function in the node frames."""
        v, g, h = func.evaluate(self.nodes)
        E = self.frames
        grad = np.einsum("nik,ni->nk", E, g)
        radial = np.einsum("ni,ni->n", self.nodes, g)
        hess = np.einsum("nik,nij,njl->nkl", E, h, E) - radial[:, None, None] * np.eye(self.n)[None]
        return v, grad, 0.5 * (hess + np.swapaxes(hess, 1, 2))


def build_grid(n: int, degree: int) -> SphericalGrid:
    """Product grid on S^n exact for spherical polynomials of degree ``degree``."""
    if n not in (2, 3, 4):
        raise DomainError(f"unsupported sphere dimension n={n}")
    if degree < 6:
        raise DomainError("degree must be at least 6")
    m = degree // 2 + 1
    N = degree + 1
    phi = 2 * np.pi * np.arange(N) / N
    pts = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    wts = np.full(N, 2 * np.pi / N)
    idx = np.arange(N)[:, None]
    for k in range(2, n + 1):
        s, w = _polar_rule(m, k)
        c = np.sqrt(1 - s ** 2)
        pts = np.concatenate([
            np.repeat(c, pts.shape[0])[:, None] * np.tile(pts, (m, 1)),
            np.repeat(s, pts.shape[0])[:, None],
        ], axis=1)
        wts = np.repeat(w, wts.size) * np.tile(wts, m)
        idx = np.concatenate([np.repeat(np.arange(m), idx.shape[0])[:, None], np.tile(idx, (m, 1))], axis=1)
    return SphericalGrid(n, degree, pts, wts, _householder_frames(pts), idx)


@dataclass(frozen=True, eq=False)
class TorusGrid:
    """Uniform trapezoidal grid on the flat torus ``[0, L)^n``."""

    n: int
    degree: int
    length: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    index: np.ndarray = field(repr=False)
    fiber: str = "torus"

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def volume(self) -> float:
        return self.length ** self.n

    def integrate(self, values) -> float:
        return float(np.sum(np.asarray(values) * self.weights))

    def intrinsic(self, func):
        v, g, h = func.evaluate(self.nodes)
        return v, g, 0.5 * (h + np.swapaxes(h, 1, 2))


def build_torus_grid(n: int, degree: int, length: float = 2 * np.pi) -> TorusGrid:
    """Exact for trigonometric polynomials of degree ``degree`` per axis."""
    if n not in (2, 3, 4):
        raise DomainError(f"unsupported torus dimension n={n}")
    if degree < 6:
        raise DomainError("degree must be at least 6")
    N = degree + 1
    axis = length * np.arange(N) / N
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    nodes = np.stack([a.ravel() for a in mesh], axis=1)
    imesh = np.meshgrid(*([np.arange(N)] * n), indexing="ij")
    index = np.stack([a.ravel() for a in imesh], axis=1)
    weights = np.full(nodes.shape[0], (length / N) ** n)
    return TorusGrid(n, degree, float(length), nodes, weights, index)
