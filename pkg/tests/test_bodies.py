from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spaceform_float import spaceform as sf
from spaceform_float.bodies import (BodyError, EmptyWulff, Polytope, Smooth2D, TruncatedQuadric, ball,
                                    body_from_spec, direction_grid, ellipsoid, hausdorff_distance, linear_image,
                                    transform_quadric, wulff_shape)

SQUARE = Polytope.box([1.0, 1.0])
DISK = ball(np.zeros(2), 1.0, 0.0)


def _angles(count):
    th = np.linspace(0, 2 * math.pi, count, endpoint=False)
    return np.stack([np.cos(th), np.sin(th)], axis=1)


def test_support_examples():
    V = _angles(7)
    np.testing.assert_allclose(DISK.support(V), 1.0, rtol=1e-15)
    np.testing.assert_allclose(ball(np.zeros(2), 1.0, -1.0).support(V), math.tanh(1), rtol=1e-15)
    d = np.array([[1.0, 1.0]]) / math.sqrt(2)
    assert SQUARE.support(d)[0] == pytest.approx(math.sqrt(2), rel=1e-15)


def test_support_lambda_examples():
    v = np.array([[0.6, 0.8]])
    hyp = ball(np.zeros(2), 1.0, -1.0)
    assert hyp.support_lambda(v, -1.0)[0] == pytest.approx(1.0, rel=1e-14)
    assert SQUARE.support_lambda(v, 0.0)[0] == pytest.approx(SQUARE.support(v)[0])
    assert DISK.support_lambda(v, 1.0)[0] == pytest.approx(math.pi / 4, rel=1e-15)


def test_off_centre_geodesic_ball_is_metric_ball():
    for lam, r in [(-1.0, 0.6), (1.0, 0.4)]:
        c = np.array([0.3, -0.2])
        B = ball(c, r, lam)
        S = B.boundary_quadrature(256)
        d = np.array([sf.distance(c, x, lam) for x in S.x])
        np.testing.assert_allclose(d, r, rtol=1e-10)


def test_disk_quadrature():
    S = DISK.boundary_quadrature(10_000)
    np.testing.assert_allclose(S.curvature, 1.0, rtol=1e-12)
    assert abs(S.weight.sum() - 2 * math.pi) <= 1e-8
    np.testing.assert_allclose(np.linalg.norm(S.x, axis=1), 1.0, rtol=1e-14)


def test_square_quadrature():
    S = SQUARE.boundary_quadrature(400)
    assert np.all(S.curvature == 0.0)
    assert S.weight.sum() == pytest.approx(8.0, rel=1e-14)


def test_ellipse_perimeter():
    a, b = 2.0, 1.0
    exact = float(4 * a * mp.ellipe(1 - (b / a) ** 2))
    assert exact == pytest.approx(9.688448, abs=1e-6)
    S = ellipsoid([a, b]).boundary_quadrature(4096)
    assert S.weight.sum() == pytest.approx(exact, rel=1e-12)


def test_ellipsoid_surface_area_3d():
    a, b, c = 1.0, 0.7, 0.5
    # Legendre form of the ellipsoid area
    phi = mp.acos(c / a)
    k2 = (a * a * (b * b - c * c)) / (b * b * (a * a - c * c))
    exact = float(2 * mp.pi * c * c + 2 * mp.pi * a * b / mp.sin(phi)
                  * (mp.ellipe(phi, k2) * mp.sin(phi) ** 2 + mp.ellipf(phi, k2) * mp.cos(phi) ** 2))
    S = ellipsoid([a, b, c]).boundary_quadrature(20480)
    assert S.weight.sum() == pytest.approx(exact, rel=1e-6)
    np.testing.assert_allclose(ball(np.zeros(3), 1.0, 0.0).boundary_quadrature(20480).weight.sum(), 4 * math.pi,
                               rtol=1e-6)


def test_boundary_samples_on_boundary():
    bodies = [ellipsoid([1.2, 0.5]), Smooth2D(1.0, ((2, 0.1, 0.05), (3, -0.03, 0.02))),
              Polytope.regular_polygon(7, 0.8), ellipsoid([1.0, 0.7, 0.5]), Polytope.box([0.5, 0.4, 0.3])]
    for K in bodies:
        S = K.boundary_quadrature(1024 if K.dim == 2 else 5120)
        # x on the boundary: x.N = h(N)
        np.testing.assert_allclose(np.sum(S.x * S.normal, axis=1), K.support(S.normal), atol=1e-10)
        np.testing.assert_allclose(np.linalg.norm(S.normal, axis=1), 1.0, atol=1e-12)
        assert np.all(S.curvature >= 0)


def test_smooth2d_curvature_matches_finite_differences():
    K = Smooth2D(1.0, ((2, 0.1, 0.05), (3, -0.03, 0.02), (5, 0.004, 0.0)))
    m = 10_000
    th = 2 * math.pi * np.arange(m) / m
    x, rho = K.point(th)
    h = 2 * math.pi / m
    d1 = (np.roll(x, -1, 0) - np.roll(x, 1, 0)) / (2 * h)
    d2 = (np.roll(x, -1, 0) - 2 * x + np.roll(x, 1, 0)) / h**2
    kappa = np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / np.linalg.norm(d1, axis=1) ** 3
    S = K.boundary_quadrature(m)
    np.testing.assert_allclose(S.curvature, 1 / rho, rtol=1e-14)
    np.testing.assert_allclose(kappa, S.curvature, atol=1e-6)


def test_smooth2d_rejects_nonconvex():
    with pytest.raises(BodyError):
        Smooth2D(1.0, ((3, 0.2, 0.0),))


def test_wulff_constant_profile_is_ball():
    for count in (64, 256, 1024):
        V = _angles(count)
        P = wulff_shape(V, np.ones(count))
        # circumscribed polygon: vertex radius 1/cos(pi/count)
        assert hausdorff_distance(P, DISK, _angles(4 * count)) == pytest.approx(1 / math.cos(math.pi / count) - 1,
                                                                                 rel=1e-6)


def test_wulff_of_support_contains_body_and_converges():
    K = ellipsoid([1.0, 0.5])
    gaps = []
    for count in (16, 32, 64, 128):
        V = _angles(count)
        P = wulff_shape(V, K.support(V))
        fine = _angles(4096)
        assert np.all(P.support(fine) >= K.support(fine) - 1e-12)
        gaps.append(hausdorff_distance(P, K, fine))
    assert all(b < a for a, b in zip(gaps, gaps[1:]))


def test_wulff_3d():
    V = direction_grid(3, 642)
    P = wulff_shape(V, np.ones(len(V)))
    assert P.dim == 3
    assert np.all(P.support(V) <= 1 + 1e-12)
    assert hausdorff_distance(P, ball(np.zeros(3), 1.0, 0.0)) < 0.05


def test_wulff_empty():
    V = _angles(64)
    f = np.full(64, 5.0)
    f[0] = -2.0
    f[32] = -2.0
    with pytest.raises(EmptyWulff):
        wulff_shape(V, f)


def test_hausdorff_examples():
    assert hausdorff_distance(DISK, DISK) == 0.0
    assert hausdorff_distance(DISK, ball(np.zeros(2), 2.0, 0.0)) == pytest.approx(1.0)
    assert hausdorff_distance(DISK, SQUARE) == pytest.approx(math.sqrt(2) - 1, rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.floats(0.2, 1.0), st.floats(0.2, 1.0))
def test_support_positively_homogeneous_and_sublinear(t, a, b):
    K = ellipsoid([a, b])
    V = _angles(32)
    np.testing.assert_allclose(K.support(t * V), t * K.support(V), rtol=1e-13)
    W = np.roll(V, 5, axis=0)
    assert np.all(K.support(V + W) <= K.support(V) + K.support(W) + 1e-12)


def test_truncation_support_dominated():
    B = DISK
    T = TruncatedQuadric(B, np.array([[1.0, 0.0]]), [0.3])
    V = _angles(512)
    assert np.all(T.support(V) <= B.support(V) + 1e-15)
    assert T.support(np.array([[1.0, 0.0]]))[0] == pytest.approx(0.3)


def test_polytope_from_halfspaces_and_vertices_agree():
    P = Polytope.from_halfspaces([[1, 0], [-1, 0], [0, 1], [0, -1], [1, 1]], [1, 1, 1, 1, 1.5])
    Q = Polytope.from_vertices(P.vertices)
    V = _angles(100)
    np.testing.assert_allclose(P.support(V), Q.support(V), atol=1e-12)
    assert len(P.vertices) == 5


def test_transforms():
    E = ellipsoid([1.0, 0.5])
    A = np.array([[2.0, 0.3], [0.0, 0.5]])
    L = linear_image(E, A)
    V = _angles(64)
    # h_{AK}(v) = h_K(A^T v)
    np.testing.assert_allclose(L.support(V), E.support(V @ A), rtol=1e-12)
    T = sf.translation_matrix(np.array([0.2, 0.1]), -1.0)
    M = transform_quadric(ellipsoid([0.3, 0.2]), T)
    S = ellipsoid([0.3, 0.2]).boundary_quadrature(64)
    y = sf.apply_projective(T, S.x)
    np.testing.assert_allclose(M.contains(y, tol=1e-9), True)


def test_body_from_spec_and_check_in():
    K = body_from_spec({"type": "ball", "radius": 1.0}, -1.0, 2)
    assert K.support(np.array([[1.0, 0.0]]))[0] == pytest.approx(math.tanh(1))
    with pytest.raises(sf.DomainError):
        SQUARE.check_in(sf.SpaceForm(-1.0, 2))
    with pytest.raises(BodyError):
        DISK.check_in(sf.SpaceForm(0.0, 3))
    with pytest.raises(BodyError):
        body_from_spec({"type": "torus"}, 0.0, 2)
    assert body_from_spec({"type": "polytope", "vertices": [[0, 0], [1, 0], [0, 1]]}, 0.0, 2).dim == 2
    sm = body_from_spec({"type": "smooth2d", "a0": 1.0, "terms": [[2, 0.1, 0.0]]}, 0.0, 2)
    assert sm.support(np.array([[1.0, 0.0]]))[0] == pytest.approx(1.1)


def test_direction_grids():
    V = direction_grid(2)
    assert V.shape == (2048, 2)
    W = direction_grid(3)
    assert W.shape[1] == 3 and len(W) >= 1280
    np.testing.assert_allclose(np.linalg.norm(W, axis=1), 1.0)
