import numpy as np
import pytest

from curvlab.aniso import (
    aniso_frame,
    aniso_frames,
    aniso_hk_gap,
    aniso_maclaurin,
    aniso_minkowski_residual,
    aniso_stability_sweep,
    constant_anisotropy,
    convexity_margin,
    ellipsoidal_anisotropy,
    linear_anisotropy,
    wulff_map,
    wulff_shape,
)
from curvlab.ambient import SpaceForm
from curvlab.errors import DomainError, GeometryError
from curvlab.functions import Affine, Constant, LinearCombination, Polynomial, QuadraticFormPower
from curvlab.grid import build_grid
from curvlab.hypersurface import RadialGraph
from curvlab.identities import heintze_karcher_gap, minkowski_residual
from curvlab.weingarten import WeingartenSpec

ELLIPSOID = QuadraticFormPower.ellipsoid_radius((1.3, 1.0, 0.8))
ELL_F = ellipsoidal_anisotropy([1.0, 2.0, 0.6])


def test_constructors_validate():
    with pytest.raises(DomainError):
        constant_anisotropy(0.0)
    with pytest.raises(DomainError):
        linear_anisotropy([1.0, 0, 0])
    with pytest.raises(DomainError):
        ellipsoidal_anisotropy([1.0, -1.0, 1.0])


def test_convexity_margins():
    g = build_grid(2, 12)
    assert convexity_margin(constant_anisotropy(2.0), g) == pytest.approx(2.0)
    assert convexity_margin(ELL_F, g) > 0
    assert convexity_margin(linear_anisotropy([0.3, 0, 0]), g) > 0


def test_wulff_map_examples():
    x = build_grid(2, 10).nodes
    assert np.allclose(wulff_map(constant_anisotropy(1.5), x), 1.5 * x)
    v = np.array([0.2, -0.1, 0.3])
    assert np.allclose(wulff_map(linear_anisotropy(v), x), x + v)


def test_constant_anisotropy_reduces_to_isotropic():
    E = RadialGraph.build(SpaceForm(2, 0.0), ELLIPSOID, 30)
    af = aniso_frames(E, constant_anisotropy(1.0))
    assert np.allclose(af.kappaF, np.sort(E.frames.kappa, axis=1), atol=1e-10)
    for r in (0, 1):
        # the anisotropic form is written with the sides swapped
        assert aniso_minkowski_residual(E, constant_anisotropy(1.0), r).residual_or_gap == pytest.approx(
            -minkowski_residual(E, r + 1).residual_or_gap, abs=1e-10)
    assert aniso_hk_gap(E, constant_anisotropy(1.0)).gap == pytest.approx(heintze_karcher_gap(E).gap, abs=1e-10)


def test_homogeneity_in_F():
    E = RadialGraph.build(SpaceForm(2, 0.0), ELLIPSOID, 20)
    a = aniso_frames(E, ELL_F)
    b = aniso_frames(E, ellipsoidal_anisotropy([4.0, 8.0, 2.4]))
    assert np.allclose(b.kappaF, 2 * a.kappaF)
    assert np.allclose(b.F_nu, 2 * a.F_nu)


@pytest.mark.parametrize("rho", [0.7, 1.0, 1.6])
def test_wulff_shape_is_anisotropic_umbilic(rho):
    W = wulff_shape(ELL_F, 2, 40, rho)
    af = aniso_frames(W.surface, ELL_F)
    assert np.max(np.abs(af.kappaF - 1 / rho)) < 1e-8
    assert abs(aniso_hk_gap(W.surface, ELL_F).relative) < 1e-8
    for r in (0, 1):
        assert abs(aniso_minkowski_residual(W.surface, ELL_F, r).relative) < 1e-10


def test_wulff_volume_without_closed_form():
    W = wulff_shape(ELL_F, 2, 40)
    F = ELL_F.__class__(ELL_F.F, "no radius")
    assert wulff_shape(F, 2, 40).volume == pytest.approx(W.volume, rel=1e-7)


def test_round_sphere_with_anisotropic_F_has_positive_gap():
    S = RadialGraph.build(SpaceForm(2, 0.0), Constant(1.0), 40)
    rep = aniso_hk_gap(S, ELL_F)
    assert rep.gap > 1e-3 * rep.relative_scale
    frame = aniso_frame(S, ELL_F, node=0)
    assert aniso_maclaurin(frame, 2).ok


def test_anisotropy_needs_flat_ambient():
    S = RadialGraph.build(SpaceForm(2, -1.0), Constant(1.0), 10)
    with pytest.raises(GeometryError):
        aniso_frames(S, ELL_F)


def test_short_aniso_sweep_co_vanishes():
    W = ELL_F.wulff_radius
    harmonic = Polynomial.from_terms([(1.0, (1, 1, 0))])
    fam = lambda t: RadialGraph.build(SpaceForm(2, 0.0),
                                      LinearCombination(((1.0, W), (t, harmonic))), 30)
    res = aniso_stability_sweep(fam, ELL_F, WeingartenSpec(2, 0.0, 1.0), [1e-1, 1e-2, 1e-3, 1e-4])
    assert res.co_vanishing and res.bounded
    assert res.slope == pytest.approx(1.0, abs=0.1)
    assert all(r.rho == pytest.approx(1.0, abs=1e-2) for r in res.records)
