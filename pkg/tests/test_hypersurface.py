import math

import numpy as np
import pytest
from scipy.spatial.distance import directed_hausdorff

from curvlab.ambient import SpaceForm, cdelta, cosh_warping, sdelta
from curvlab.errors import DataError, GeometryError
from curvlab.functions import Affine, Constant, Polynomial, QuadraticFormPower, TranslatedSphereRadius
from curvlab.grid import build_grid
from curvlab.hypersurface import (
    RadialGraph,
    best_fit_geodesic_sphere,
    best_fit_slice,
    enclosed_weighted_volume,
    euclidean_model_surface,
    frame_at,
    geometric_summary,
    hausdorff_to_sphere,
    integrate,
    read_radius_csv,
    starshape_margin,
    surface_norm,
    tabulated_radius,
)


@pytest.mark.parametrize("delta,rho", [(-1.0, 0.8), (0.0, 1.3), (0.5, 1.0), (1.0, 1.2)])
@pytest.mark.parametrize("n", [2, 3])
def test_geodesic_sphere_frames(delta, rho, n):
    S = RadialGraph.build(SpaceForm(n, delta), Constant(rho), 12)
    fs = S.frames
    k = cdelta(delta, rho) / sdelta(delta, rho)
    assert np.allclose(fs.kappa, k, rtol=1e-13)
    assert np.allclose(fs.support, sdelta(delta, rho), rtol=1e-13)
    assert np.allclose(fs.conformal_f, cdelta(delta, rho), rtol=1e-13)
    assert S.area == pytest.approx(sdelta(delta, rho) ** n * S.grid.volume, rel=1e-13)
    pf = frame_at(S, 3)
    assert pf.kappa.n == n and pf.support == pytest.approx(sdelta(delta, rho))


def test_ellipsoid_curvature_oracle():
    a, b, c = 1.5, 1.0, 0.7
    E = RadialGraph.build(SpaceForm(2, 0.0), QuadraticFormPower.ellipsoid_radius((a, b, c)), 30)
    p = E.model_points()
    h2 = np.sum(p ** 2 / np.array([a, b, c]) ** 4, axis=1)
    K = 1 / ((a * b * c) ** 2 * h2 ** 2)
    Hsum = (a * a + b * b + c * c - np.sum(p ** 2, axis=1)) / ((a * b * c) ** 2 * h2 ** 1.5)
    fs = E.frames
    assert np.allclose(fs.Hr(2), K, rtol=1e-11)
    assert np.allclose(2 * fs.H, Hsum, rtol=1e-11)
    # Gauss-Bonnet; the integrand is analytic, so quadrature converges geometrically
    fine = E.with_grid(80)
    assert integrate(fine, fine.frames.Hr(2)) == pytest.approx(4 * math.pi, rel=1e-6)


def test_integrate_examples():
    S = RadialGraph.build(SpaceForm(2, 0.0), Constant(2.0), 20)
    assert integrate(S, 1.0) == pytest.approx(16 * math.pi, rel=1e-13)
    assert integrate(S, lambda fs: fs.H) == pytest.approx(8 * math.pi, rel=1e-13)
    assert surface_norm(S, np.full(S.grid.size, -3.0), 2) == pytest.approx(3.0)
    assert surface_norm(S, np.arange(S.grid.size), np.inf) == S.grid.size - 1
    bad = np.zeros(S.grid.size)
    bad[5] = np.nan
    with pytest.raises(DataError) as e:
        integrate(S, bad)
    assert e.value.location == 5


@pytest.mark.parametrize("delta", [-1.0, 0.0, 0.5])
def test_ball_volumes(delta):
    rho = 0.9
    S = RadialGraph.build(SpaceForm(2, delta), Constant(rho), 12)
    vol = enclosed_weighted_volume(S)
    if delta == 0:
        ref = 4 * math.pi * rho ** 3 / 3
    elif delta < 0:
        ref = math.pi * (math.sinh(2 * rho) - 2 * rho)
    else:
        k = math.sqrt(delta)
        ref = 4 * math.pi / k ** 3 * (k * rho / 2 - math.sin(2 * k * rho) / 4)
    assert vol == pytest.approx(ref, rel=1e-12)
    # weight f = c_delta: int_0^rho c s^2 = s^3 / 3
    assert enclosed_weighted_volume(S, "f") == pytest.approx(4 * math.pi * sdelta(delta, rho) ** 3 / 3, rel=1e-12)


def test_star_shape_margin():
    S = RadialGraph.build(SpaceForm(2, 0.0), TranslatedSphereRadius((0.0, 0.0, 0.5), 1.0), 20)
    # support of a sphere about c is rho + <c, nu>; its minimum 0.5 sits at a pole off the nodes
    assert 0.5 <= starshape_margin(S) < 0.51
    f = Affine(Polynomial.from_terms([(1.0, (0, 0, 1))]), 0.5, 1.0)
    bad = RadialGraph.build(SpaceForm(2, 0.0), f, 12)
    assert starshape_margin(bad) < 0


def test_frames_reject_surface_outside_domain():
    S = RadialGraph.build(SpaceForm(2, 1.0), Constant(3.5), 10)
    with pytest.raises(GeometryError):
        S.frames
    W = RadialGraph.build(cosh_warping(2, 1.0), Constant(1.5), 10)
    with pytest.raises(GeometryError):
        W.frames


def test_summary_translated_sphere_and_ellipsoid():
    c = np.array([0.1, -0.2, 0.15])
    S = RadialGraph.build(SpaceForm(2, 0.0), TranslatedSphereRadius(tuple(c), 1.0), 24)
    s = geometric_summary(S)
    assert np.allclose(s.center, c, atol=1e-10)
    assert s.extrinsic_radius == pytest.approx(1.0, rel=1e-10)
    assert s.B_sup_norm == pytest.approx(math.sqrt(2), rel=1e-10)
    E = RadialGraph.build(SpaceForm(2, 0.0), QuadraticFormPower.ellipsoid_radius((2.0, 1.0, 1.0)), 30)
    s = geometric_summary(E)
    assert np.allclose(s.center, 0, atol=1e-4)
    # sampled at the nodes, which miss the long axis
    assert 1.95 < s.extrinsic_radius <= 2.0
    assert s.enclosed_volume == pytest.approx(4 * math.pi * 2 / 3, rel=1e-7)


@pytest.mark.parametrize("delta", [-1.0, 0.0, 0.5])
def test_best_fit_recovers_exact_sphere(delta):
    sf = SpaceForm(2, delta)
    S = RadialGraph.build(sf, Constant(0.8), 16)
    fit = best_fit_geodesic_sphere(S)
    assert fit.rho0 == pytest.approx(0.8, rel=1e-12)
    assert fit.residual < 1e-10
    assert hausdorff_to_sphere(S, fit.center, fit.rho0) < 1e-10


def test_best_fit_translated_flat_sphere():
    c = (0.2, 0.0, -0.1)
    S = RadialGraph.build(SpaceForm(2, 0.0), TranslatedSphereRadius(c, 1.1), 24)
    fit = best_fit_geodesic_sphere(S)
    assert np.allclose(fit.center, c, atol=1e-7)
    assert fit.rho0 == pytest.approx(1.1, rel=1e-8)


def test_hausdorff_against_point_cloud_oracle():
    radius = QuadraticFormPower.ellipsoid_radius((1.2, 1.0, 0.9))
    E = RadialGraph.build(SpaceForm(2, 0.0), radius, 24)
    ours = hausdorff_to_sphere(E, np.zeros(3), 1.0)
    # dense point clouds of both sets approximate the set distance
    sphere = build_grid(2, 200).nodes
    ellipsoid = RadialGraph.build(SpaceForm(2, 0.0), radius, 200).model_points()
    oracle = max(directed_hausdorff(ellipsoid, sphere)[0], directed_hausdorff(sphere, ellipsoid)[0])
    assert ours == pytest.approx(oracle, abs=1e-2)
    assert ours == pytest.approx(0.2, rel=1e-12)
    with pytest.raises(GeometryError):
        hausdorff_to_sphere(E, np.zeros(3), 0.0)


def test_slice_fit():
    W = RadialGraph.build(cosh_warping(2, 2.0), Constant(1.0), 10)
    fit = best_fit_slice(W)
    assert fit.t1 == pytest.approx(1.0) and fit.residual < 1e-14
    with pytest.raises(GeometryError):
        best_fit_geodesic_sphere(W)


def test_flat_model_matches_conformal_radius():
    sf = SpaceForm(2, -1.0)
    S = RadialGraph.build(sf, Constant(1.0), 10)
    flat = euclidean_model_surface(S)
    assert np.allclose(flat.raw[0], math.tanh(0.5))
    with pytest.raises(GeometryError):
        euclidean_model_surface(RadialGraph.build(cosh_warping(2), Constant(1.0), 10))


def test_tabulated_radius_round_trip(tmp_path):
    grid = build_grid(2, 30)
    radius = QuadraticFormPower.ellipsoid_radius((1.2, 1.0, 0.9))
    vals = radius(grid.nodes)
    path = tmp_path / "r.csv"
    cols = [f"i{k}" for k in range(grid.index.shape[1])]
    order = np.random.default_rng(0).permutation(grid.size)
    lines = [",".join(cols + ["radius"])]
    lines += [",".join([str(x) for x in grid.index[i]] + [repr(float(vals[i]))]) for i in order]
    path.write_text("\n".join(lines) + "\n")
    read = read_radius_csv(path, grid)
    assert np.array_equal(read, vals)
    poly = tabulated_radius(grid, read)
    S = RadialGraph(SpaceForm(2, 0.0), poly, grid)
    E = RadialGraph(SpaceForm(2, 0.0), radius, grid)
    assert np.max(np.abs(S.frames.kappa - E.frames.kappa)) < 1e-3
    with pytest.raises(DataError):
        tabulated_radius(grid, vals[:-1])
    path.write_text("a,b\n1,2\n")
    with pytest.raises(DataError):
        read_radius_csv(path, grid)
