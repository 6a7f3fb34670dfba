"""Run configuration: a TOML file resolved into ambient, surface and spec objects.

Sections (all optional except where a command needs them)::

    [run]        degree, seed, tol
    [ambient]    kind = "space_form" | "warped"; n; delta
                 warping = "cosh" | "polynomial"; coefficients; t0; k; fiber
    [surface]    family = "sphere" | "ellipsoid" | "perturbed_sphere" |
                 "translated_sphere" | "slice" | "warped_graph" | "tabulated"
                 radius; axes; center; harmonic = [[c, [e...]], ...];
                 amplitude; path
    [weingarten] r; a; b (number or "exact"); fit
    [cn]         samples; seed
    [sweep]      t = [...]; decay_threshold
    [aniso]      family = "constant" | "linear" | "ellipsoidal"; c; v; Q;
                 harmonic; t; r; a; b; ratio_bound; surface = "wulff" | "configured"
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ambient import SpaceForm, WarpedProduct, cosh_warping, polynomial_warping
from .errors import ConfigError, CurvlabError
from .functions import (
    Affine,
    Constant,
    Polynomial,
    QuadraticFormPower,
    SmoothFunction,
    TranslatedSphereRadius,
)

__all__ = ["RunConfig", "load_config", "parse_config"]

_SECTIONS = {"run", "ambient", "surface", "weingarten", "cn", "sweep", "aniso"}


@dataclass
class RunConfig:
    raw: dict
    degree: int = 40
    seed: int = 0
    tol: float = 1e-6
    source: str = "<inline>"
    overrides: dict = field(default_factory=dict)

    def section(self, name: str) -> dict:
        return dict(self.raw.get(name, {}))

    def echo(self) -> dict:
        return {"source": self.source, "degree": self.degree, "seed": self.seed, "tol": self.tol,
                "sections": self.raw}

    # ------------------------------------------------------------------ ambient

    def ambient(self):
        a = self.section("ambient")
        n = _int(a, "n", 2)
        kind = a.get("kind", "space_form")
        if kind == "space_form":
            return SpaceForm(n, _float(a, "delta", 0.0))
        if kind != "warped":
            raise ConfigError(f"unknown ambient kind {kind!r}")
        warping = a.get("warping", "cosh")
        fiber = a.get("fiber", "sphere")
        k = _float(a, "k", 1.0 if fiber == "sphere" else 0.0)
        t0 = _float(a, "t0", 2.0)
        if warping == "cosh":
            return cosh_warping(n, t0, k=k, fiber=fiber)
        if warping == "polynomial":
            coeffs = a.get("coefficients")
            if not isinstance(coeffs, list) or not coeffs:
                raise ConfigError("polynomial warping needs a nonempty 'coefficients' list")
            return polynomial_warping(n, [float(c) for c in coeffs], t0, k=k, fiber=fiber)
        raise ConfigError(f"unknown warping family {warping!r}")

    # ------------------------------------------------------------------ surface

    def harmonic(self, section: dict, dim: int) -> SmoothFunction:
        terms = section.get("harmonic", [[1.0, [2] + [0] * (dim - 1)], [-1.0, [0, 2] + [0] * (dim - 2)]])
        try:
            poly = Polynomial.from_terms((float(c), tuple(e)) for c, e in terms)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed harmonic term list: {exc}") from exc
        if any(len(e) != dim for _, e in poly.terms):
            raise ConfigError(f"harmonic exponents must have {dim} entries")
        return poly

    def radius_function(self, amplitude: float | None = None) -> SmoothFunction:
        """Graph function of the configured surface; ``amplitude`` overrides
        the perturbation amplitude (used by sweeps)."""
        s = self.section("surface")
        amb = self.ambient()
        dim = amb.n + 1
        fam = s.get("family", "sphere")
        rho = _float(s, "radius", 1.0)
        if fam in ("sphere", "slice"):
            return Constant(rho)
        if fam in ("perturbed_sphere", "warped_graph"):
            t = _float(s, "amplitude", 0.1) if amplitude is None else amplitude
            return Affine(self.harmonic(s, dim), rho, t)
        if fam == "ellipsoid":
            axes = s.get("axes")
            if not isinstance(axes, list) or len(axes) != dim:
                raise ConfigError(f"ellipsoid needs 'axes' with {dim} entries")
            return QuadraticFormPower.ellipsoid_radius([float(x) for x in axes])
        if fam == "translated_sphere":
            c = s.get("center", [0.0] * dim)
            if len(c) != dim or not np.linalg.norm(c) < rho:
                raise ConfigError("translated_sphere needs |center| < radius")
            return TranslatedSphereRadius(tuple(float(x) for x in c), rho)
        if fam == "tabulated":
            from .grid import build_grid
            from .hypersurface import read_radius_csv, tabulated_radius
            path = s.get("path")
            if not path:
                raise ConfigError("tabulated surface needs 'path'")
            p = Path(path)
            if not p.is_absolute():
                p = Path(self.source).parent / p
            grid = build_grid(amb.n, self.degree)
            try:
                vals = read_radius_csv(p, grid)
            except OSError as exc:
                raise ConfigError(f"cannot read {p}: {exc}") from exc
            return tabulated_radius(grid, vals)
        raise ConfigError(f"unknown surface family {fam!r}")

    def surface(self, amplitude: float | None = None, degree: int | None = None):
        from .hypersurface import RadialGraph
        s = self.section("surface")
        return RadialGraph.build(self.ambient(), self.radius_function(amplitude),
                                 self.degree if degree is None else degree, s.get("family", "sphere"))

    # ------------------------------------------------------------------ other

    def t_values(self, section: str, default) -> list:
        t = self.section(section).get("t", default)
        try:
            t = [float(x) for x in t]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{section}] t must be a list of numbers") from exc
        if len(t) < 2 or any(not x > 0 for x in t) or any(b >= a for a, b in zip(t, t[1:])):
            raise ConfigError(f"[{section}] t must be positive and strictly decreasing")
        return t

    def cn_settings(self) -> tuple:
        c = self.section("cn")
        return _int(c, "samples", 10 ** 6), _int(c, "seed", self.seed)


def _float(d: dict, key: str, default: float) -> float:
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key} must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{key} must be finite")
    return v


def _int(d: dict, key: str, default: int) -> int:
    v = d.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{key} must be an integer, got {v!r}")
    return v


def parse_config(text: str, source: str = "<inline>", degree=None, seed=None, tol=None) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: {exc}") from exc
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown section(s): {sorted(unknown)}")
    run = raw.get("run", {})
    cfg = RunConfig(raw, _int(run, "degree", 40), _int(run, "seed", 0), _float(run, "tol", 1e-6), source)
    if degree is not None:
        cfg.degree = degree
        cfg.overrides["degree"] = degree
    if seed is not None:
        cfg.seed = seed
        cfg.overrides["seed"] = seed
    if tol is not None:
        cfg.tol = tol
        cfg.overrides["tol"] = tol
    if cfg.degree < 6:
        raise ConfigError("degree must be at least 6")
    if not cfg.tol > 0:
        raise ConfigError("tol must be positive")
    try:
        cfg.ambient()
        cfg.radius_function()
    except ConfigError:
        raise
    except CurvlabError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def load_config(path, **overrides) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    return parse_config(text, str(p), **overrides)
