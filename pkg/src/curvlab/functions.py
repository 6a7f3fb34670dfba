"""Smooth scalar functions on the fiber with derivative access.

A sphere function is evaluated through an arbitrary smooth extension to the
ambient ``R^{n+1}``: ``evaluate(x)`` returns the value, ambient gradient and
ambient Hessian of that extension at the points ``x`` (shape ``(N, n+1)``).
The grid converts these to covariant derivatives on the sphere.  Torus
functions are evaluated on flat coordinates and return their derivatives
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "Constant",
    "Polynomial",
    "QuadraticFormPower",
    "TranslatedSphereRadius",
    "Affine",
    "Product",
    "Compose",
    "LinearCombination",
    "Coordinate",
    "FourierTorus",
    "spherical_polynomial",
]


class SmoothFunction:
    def evaluate(self, x):
        raise NotImplementedError

    def __call__(self, x):
        return self.evaluate(np.atleast_2d(np.asarray(x, dtype=float)))[0]


@dataclass(frozen=True)
class Constant(SmoothFunction):
    c: float

    def evaluate(self, x):
        N, d = x.shape
        return np.full(N, float(self.c)), np.zeros((N, d)), np.zeros((N, d, d))


@dataclass(frozen=True)
class Polynomial(SmoothFunction):
    """``sum_j c_j prod_i x_i^{a_ij}`` given as ``((c, (a_1, ..., a_d)), ...)``."""

    terms: tuple

    @classmethod
    def from_terms(cls, terms) -> "Polynomial":
        return cls(tuple((float(c), tuple(int(a) for a in e)) for c, e in terms))

    def evaluate(self, x):
        N, d = x.shape
        val = np.zeros(N)
        grad = np.zeros((N, d))
        hess = np.zeros((N, d, d))
        for c, e in self.terms:
            e = np.asarray(e)
            if e.size != d:
                raise ValueError(f"monomial {tuple(e)} does not match dimension {d}")
            powers = [[x[:, i] ** max(e[i] - q, 0) for q in range(3)] for i in range(d)]

            def mono(shift):
                out = np.full(N, float(c))
                for i in range(d):
                    s = shift[i]
                    if s > e[i]:
                        return np.zeros(N)
                    coef = 1.0
                    for q in range(s):
                        coef *= e[i] - q
                    out = out * coef * powers[i][s]
                return out

            val += mono([0] * d)
            for i in range(d):
                sh = [0] * d
                sh[i] = 1
                grad[:, i] += mono(sh)
                for j in range(i, d):
                    sh2 = [0] * d
                    sh2[i] += 1
                    sh2[j] += 1
                    m = mono(sh2)
                    hess[:, i, j] += m
                    if j != i:
                        hess[:, j, i] += m
        return val, grad, hess


def spherical_polynomial(terms) -> Polynomial:
    return Polynomial.from_terms(terms)


@dataclass(frozen=True)
class QuadraticFormPower(SmoothFunction):
    """``(x^T A x)^p`` for symmetric positive definite ``A``.

    ``p = -1/2`` is the radial function of the ellipsoid ``x^T A x = 1``;
    ``p = 1/2`` is the support function of the ellipsoid ``y^T A^{-1} y = 1``.
    """

    A: tuple
    power: float

    @classmethod
    def of(cls, A, power) -> "QuadraticFormPower":
        A = np.asarray(A, dtype=float)
        return cls(tuple(map(tuple, 0.5 * (A + A.T))), float(power))

    @classmethod
    def ellipsoid_radius(cls, axes) -> "QuadraticFormPower":
        return cls.of(np.diag(1.0 / np.asarray(axes, dtype=float) ** 2), -0.5)

    def evaluate(self, x):
        A = np.asarray(self.A)
        p = self.power
        Ax = x @ A
        q = np.einsum("ni,ni->n", x, Ax)
        val = q ** p
        grad = (2 * p * q ** (p - 1))[:, None] * Ax
        hess = (4 * p * (p - 1) * q ** (p - 2))[:, None, None] * np.einsum("ni,nj->nij", Ax, Ax)
        hess = hess + (2 * p * q ** (p - 1))[:, None, None] * A
        return val, grad, hess


@dataclass(frozen=True)
class TranslatedSphereRadius(SmoothFunction):
    """Radial function about the origin of the sphere ``|y - c| = R``
    (requires ``|c| < R``)."""

    center: tuple
    R: float

    def evaluate(self, x):
        c = np.asarray(self.center, dtype=float)
        xc = x @ c
        disc = xc ** 2 - c @ c + self.R ** 2
        s = np.sqrt(disc)
        val = xc + s
        grad = c[None, :] * (1 + xc / s)[:, None]
        hess = ((self.R ** 2 - c @ c) / s ** 3)[:, None, None] * np.outer(c, c)[None]
        return val, grad, hess


@dataclass(frozen=True)
class Affine(SmoothFunction):
    """``a + b * f``."""

    f: SmoothFunction
    a: float = 0.0
    b: float = 1.0

    def evaluate(self, x):
        v, g, h = self.f.evaluate(x)
        return self.a + self.b * v, self.b * g, self.b * h


@dataclass(frozen=True)
class Product(SmoothFunction):
    f: SmoothFunction
    g: SmoothFunction

    def evaluate(self, x):
        fv, fg, fh = self.f.evaluate(x)
        gv, gg, gh = self.g.evaluate(x)
        val = fv * gv
        grad = fg * gv[:, None] + fv[:, None] * gg
        hess = (fh * gv[:, None, None] + fv[:, None, None] * gh
                + np.einsum("ni,nj->nij", fg, gg) + np.einsum("ni,nj->nij", gg, fg))
        return val, grad, hess


@dataclass(frozen=True)
class LinearCombination(SmoothFunction):
    """``sum_j c_j f_j`` given as ``((c, f), ...)``."""

    parts: tuple

    def evaluate(self, x):
        N, d = x.shape
        val, grad, hess = np.zeros(N), np.zeros((N, d)), np.zeros((N, d, d))
        for c, f in self.parts:
            v, g, h = f.evaluate(x)
            val = val + c * v
            grad = grad + c * g
            hess = hess + c * h
        return val, grad, hess


@dataclass(frozen=True)
class Coordinate(SmoothFunction):
    """The ambient coordinate ``x_i``."""

    i: int

    def evaluate(self, x):
        N, d = x.shape
        grad = np.zeros((N, d))
        grad[:, self.i] = 1.0
        return x[:, self.i].copy(), grad, np.zeros((N, d, d))


@dataclass(frozen=True)
class Compose(SmoothFunction):
    """``outer(f)`` where ``outer`` returns ``(value, first, second)``
    derivatives of a scalar map."""

    f: SmoothFunction
    outer: Callable

    def evaluate(self, x):
        v, g, h = self.f.evaluate(x)
        m, dm, d2m = (np.asarray(a, dtype=float) for a in self.outer(v))
        return m, dm[:, None] * g, d2m[:, None, None] * np.einsum("ni,nj->nij", g, g) + dm[:, None, None] * h


@dataclass(frozen=True)
class FourierTorus(SmoothFunction):
    """``c0 + sum_j (a_j cos(2 pi m_j.y / L) + b_j sin(2 pi m_j.y / L))`` on the
    flat torus ``[0, L)^n``; modes are ``((a, b, (m_1, ..., m_n)), ...)``."""

    c0: float
    modes: tuple
    length: float = 2 * np.pi

    def evaluate(self, y):
        N, n = y.shape
        val = np.full(N, float(self.c0))
        grad = np.zeros((N, n))
        hess = np.zeros((N, n, n))
        for a, b, m in self.modes:
            k = 2 * np.pi * np.asarray(m, dtype=float) / self.length
            ph = y @ k
            c, s = np.cos(ph), np.sin(ph)
            val += a * c + b * s
            d1 = -a * s + b * c
            d2 = -a * c - b * s
            grad += d1[:, None] * k[None]
            hess += d2[:, None, None] * np.outer(k, k)[None]
        return val, grad, hess


def as_terms(seq: Sequence) -> tuple:
    return tuple((float(c), tuple(int(a) for a in e)) for c, e in seq)
