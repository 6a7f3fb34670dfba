"""Elementary symmetric polynomials and normalized higher-order mean curvatures.

Everything here is vectorized over leading axes: a curvature array of shape
``(..., n)`` yields results of shape ``(...)``.  Polynomials are evaluated with
the product expansion of ``prod(1 + t*x_i)`` (O(n*r)), never by subset
enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

from .errors import DomainError, PreconditionError

__all__ = [
    "CurvatureVector",
    "MaclaurinChain",
    "PinchingGap",
    "elementary_symmetric",
    "esp_all",
    "hr_all",
    "normalized_hr",
    "partial_hr",
    "hr_extremal_pair",
    "maclaurin_chain",
    "umbilicity_defect",
    "pinching_gap",
    "pinching_ratio",
    "pinching_gaps",
    "sample_positive_curvatures",
    "estimate_cn",
]


@dataclass(frozen=True)
class CurvatureVector:
    """Principal curvatures at one point of an n-dimensional hypersurface."""

    values: tuple

    def __init__(self, values):
        vals = tuple(float(v) for v in np.asarray(values, dtype=float).ravel())
        if not vals:
            raise DomainError("a curvature vector needs at least one entry")
        if not all(np.isfinite(vals)):
            raise DomainError(f"non-finite principal curvature in {vals}")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)


def _as_array(x) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        raise DomainError("expected at least one principal curvature")
    return arr


def esp_all(x) -> np.ndarray:
    """All elementary symmetric polynomials ``S_0..S_n`` along the last axis.

    Returns an array of shape ``(..., n + 1)``.
    """
    x = _as_array(x)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (n + 1,))
    out[..., 0] = 1.0
    for i in range(n):
        xi = x[..., i : i + 1]
        # descending update keeps the previous coefficients intact
        out[..., 1 : i + 2] = out[..., 1 : i + 2] + xi * out[..., 0 : i + 1]
    return out


def elementary_symmetric(x, r: int):
    """``S_r(x)``: sum over all r-subsets of products of entries."""
    x = _as_array(x)
    n = x.shape[-1]
    if not 0 <= r <= n:
        raise DomainError(f"r={r} outside [0, {n}]")
    if not np.all(np.isfinite(x)):
        raise DomainError("non-finite entries")
    val = esp_all(x)[..., r]
    return float(val) if val.ndim == 0 else val


@lru_cache(maxsize=None)
def _binomials(n: int) -> np.ndarray:
    return np.array([comb(n, r) for r in range(n + 1)], dtype=float)


def hr_all(kappa) -> np.ndarray:
    """``H_0..H_{n+1}`` along the last axis (``H_0 = 1``, ``H_{n+1} = 0``)."""
    k = _as_array(kappa)
    n = k.shape[-1]
    s = esp_all(k) / _binomials(n)
    return np.concatenate([s, np.zeros(s.shape[:-1] + (1,))], axis=-1)


def normalized_hr(kappa, r: int):
    """Normalized r-th mean curvature ``S_r / C(n, r)``."""
    k = _as_array(kappa)
    n = k.shape[-1]
    if not 0 <= r <= n + 1:
        raise DomainError(f"r={r} outside [0, {n + 1}]")
    val = hr_all(k)[..., r]
    return float(val) if val.ndim == 0 else val


def partial_hr(kappa, l: int, i: int, j: int | None = None, reading: str = "derivative"):
    """Partial derivatives of ``H_l`` with respect to principal curvatures.

    With ``j`` given, returns ``d^2 H_l / (dk_i dk_j)`` for ``i != j``, i.e.
    ``S_{l-2}`` of the curvatures with entries ``i`` and ``j`` removed, divided
    by ``C(n, l)``.  ``reading="display"`` instead returns ``S_l`` of the
    remaining curvatures over ``C(n, l)`` (the sum of ``l``-fold products
    avoiding ``i`` and ``j``).  With ``j=None``, returns ``dH_l/dk_i``.
    Indices are zero-based.
    """
    k = _as_array(kappa)
    n = k.shape[-1]
    if not 0 <= l <= n:
        raise DomainError(f"l={l} outside [0, {n}]")
    if reading not in ("derivative", "display"):
        raise DomainError(f"unknown reading {reading!r}")
    idx = [i] if j is None else [i, j]
    if any(not 0 <= q < n for q in idx):
        raise DomainError(f"indices {idx} outside [0, {n})")
    if j is not None and i == j:
        raise DomainError("the two-index form needs i != j")
    order = l - len(idx) if reading == "derivative" else l
    rest = np.delete(k, idx, axis=-1)
    if order < 0 or order > rest.shape[-1]:
        val = np.zeros(k.shape[:-1])
    else:
        val = esp_all(rest)[..., order] if rest.shape[-1] else np.ones(k.shape[:-1])
        val = val / comb(n, l)
    return float(val) if np.ndim(val) == 0 else val


def hr_extremal_pair(kappa, l: int):
    """``H_{l;n,1}``: the mixed second derivative of ``H_l`` taken in the
    largest and the smallest principal curvature."""
    k = np.sort(_as_array(kappa), axis=-1)
    n = k.shape[-1]
    if n < 2:
        raise DomainError("needs n >= 2")
    if not 0 <= l <= n:
        raise DomainError(f"l={l} outside [0, {n}]")
    if l < 2:
        val = np.zeros(k.shape[:-1])
    else:
        mid = k[..., 1:-1]
        val = (esp_all(mid)[..., l - 2] if n > 2 else np.ones(k.shape[:-1])) / comb(n, l)
    return float(val) if np.ndim(val) == 0 else val


def umbilicity_defect(kappa):
    """Squared norm of the traceless part, ``sum_i (k_i - H)^2``."""
    k = _as_array(kappa)
    dev = k - k.mean(axis=-1, keepdims=True)
    val = np.einsum("...i,...i->...", dev, dev)
    return float(val) if np.ndim(val) == 0 else val


@dataclass(frozen=True)
class MaclaurinChain:
    r_max: int
    roots: tuple
    gaps: tuple
    violations: tuple

    @property
    def ok(self) -> bool:
        return not self.violations


def maclaurin_chain(kappa, r_max: int, rtol: float = 1e-10) -> MaclaurinChain:
    """Newton-Maclaurin chain ``H_s^(1/s)`` and Newton gaps for one point.

    ``violations`` lists ``("root", s)`` when ``H_{s+1}^(1/(s+1)) > H_s^(1/s)``
    and ``("gap", s)`` when ``H_s^2 - H_{s+1}H_{s-1} < 0`` beyond ``rtol``
    relative to the magnitudes involved.
    """
    k = np.asarray(kappa, dtype=float).ravel()
    n = k.size
    if not 1 <= r_max <= n:
        raise DomainError(f"r_max={r_max} outside [1, {n}]")
    h = hr_all(k)
    if h[r_max] <= 0:
        raise PreconditionError(f"H_{r_max} = {h[r_max]!r} is not positive", value=float(h[r_max]))
    roots = tuple(float(h[s] ** (1.0 / s)) for s in range(1, r_max + 1))
    gaps = tuple(float(h[s] ** 2 - h[s + 1] * h[s - 1]) for s in range(1, r_max))
    bad = []
    for s in range(1, r_max):
        if roots[s] > roots[s - 1] * (1 + rtol):
            bad.append(("root", s))
    for s in range(1, r_max):
        scale = h[s] ** 2 + abs(h[s + 1] * h[s - 1])
        if gaps[s - 1] < -rtol * scale:
            bad.append(("gap", s))
    return MaclaurinChain(r_max, roots, gaps, tuple(bad))


class PinchingGap(NamedTuple):
    gap: float
    certified_lower_bound: float
    certified: bool


def pinching_ratio(kappa, r: int, min_defect: float = 1e-9):
    """``(H_{r-1}^2 - H_r H_{r-2}) / (|tau|^2 H_{r;n,1}^2)``, vectorized.

    Returns nan where the tuple is umbilical to within ``min_defect``
    (``|tau|^2 <= min_defect * |k|^2``): there the numerator is pure
    cancellation noise.
    """
    k = _as_array(kappa)
    h = hr_all(k)
    num = h[..., r - 1] ** 2 - h[..., r] * h[..., r - 2]
    tau2 = umbilicity_defect(k)
    den = tau2 * hr_extremal_pair(k, r) ** 2
    ok = (tau2 > min_defect * np.einsum("...i,...i->...", k, k)) & (den > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(ok, num / np.where(ok, den, 1.0), np.nan)


def pinching_gap(kappa, r: int, cn: float, rtol: float = 1e-12) -> PinchingGap:
    """Gap ``H_{r-1} - H_r^((r-1)/r)`` and its certified lower bound
    ``cn |tau|^2 H_{r;n,1}^2 / (2 H_{r-1})``."""
    k = np.asarray(kappa, dtype=float).ravel()
    n = k.size
    if not 2 <= r <= n:
        raise DomainError(f"r={r} outside [2, {n}]")
    h = hr_all(k)
    if h[r] <= 0:
        raise PreconditionError(f"H_{r} = {h[r]!r} is not positive", value=float(h[r]))
    gap = float(h[r - 1] - h[r] ** ((r - 1) / r))
    bound = float(cn * umbilicity_defect(k) * hr_extremal_pair(k, r) ** 2 / (2 * h[r - 1]))
    tol = rtol * abs(h[r - 1])
    return PinchingGap(gap, bound, gap >= -tol and gap >= bound - tol)


def pinching_gaps(kappa, r: int, cn: float):
    """Vectorized ``(gap, certified_lower_bound)`` arrays for positive tuples."""
    k = _as_array(kappa)
    h = hr_all(k)
    gap = h[..., r - 1] - h[..., r] ** ((r - 1) / r)
    bound = cn * umbilicity_defect(k) * hr_extremal_pair(k, r) ** 2 / (2 * h[..., r - 1])
    return gap, bound


def sample_positive_curvatures(rng: np.random.Generator, count: int, n: int) -> np.ndarray:
    """Random positive curvature tuples spread over many decades.

    Each tuple is ``exp(s * z)`` with standard normal ``z`` and a per-tuple
    spread ``s`` drawn log-uniformly from [1e-4, 8], so both nearly umbilical
    and strongly degenerate tuples are represented.  Every ratio in this
    module is scale invariant, so each tuple is normalized to maximum 1,
    which keeps the symmetric functions of high order in range.
    """
    spread = np.exp(rng.uniform(np.log(1e-4), np.log(8.0), size=(count, 1)))
    z = spread * rng.standard_normal((count, n))
    return np.exp(z - z.max(axis=1, keepdims=True))


def _refine_ratio(seed_kappa: np.ndarray, r: int) -> float:
    def objective(logk):
        val = pinching_ratio(np.exp(logk), r)
        return float(val) if np.isfinite(val) else np.inf

    res = minimize(objective, np.log(seed_kappa), method="Nelder-Mead",
                   options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000})
    return min(float(res.fun), objective(np.log(seed_kappa)))


@lru_cache(maxsize=64)
def estimate_cn(n: int, r: int, sample_count: int = 10**6, seed: int = 0,
                refine: int = 8, chunk: int = 200_000) -> float:
    """Empirical infimum of the pinching ratio over positive curvature tuples.

    The ratio ``(H_k^2 - H_{k+1}H_{k-1}) / (|tau|^2 H_{k+1;n,1}^2)`` with
    ``k = r - 1`` is sampled ``sample_count`` times; the ``refine`` smallest
    samples are then polished by a derivative-free local search in log
    coordinates.  Deterministic for a given seed.
    """
    if not 2 <= r <= n:
        raise DomainError(f"r={r} outside [2, {n}]")
    if sample_count < 10**4:
        raise DomainError("sample_count must be at least 1e4")
    rng = np.random.default_rng(seed)
    best_vals = np.empty(0)
    best_k = np.empty((0, n))
    remaining = sample_count
    while remaining > 0:
        m = min(chunk, remaining)
        remaining -= m
        k = sample_positive_curvatures(rng, m, n)
        ratio = pinching_ratio(k, r)
        ok = np.isfinite(ratio)
        vals = np.concatenate([best_vals, ratio[ok]])
        ks = np.concatenate([best_k, k[ok]])
        keep = np.argsort(vals)[: max(refine, 1)]
        best_vals, best_k = vals[keep], ks[keep]
    if best_vals.size == 0:
        raise PreconditionError("every sampled tuple was umbilical")
    est = float(best_vals[0])
    for kk in best_k[:refine]:
        est = min(est, _refine_ratio(kk, r))
    if not est > 0:
        raise PreconditionError(f"estimated constant {est!r} is not positive", value=est)
    return est
