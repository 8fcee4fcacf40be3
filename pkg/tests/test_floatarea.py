from __future__ import annotations

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spaceform_float.bodies import BodyError, Polytope, Smooth2D, TruncatedQuadric, ball, ellipsoid, linear_image
from spaceform_float.capvolume import floating_body
from spaceform_float.floatarea import (ball_floating_area_closed, cone_volume_difference, constant_c_n,
                                       derivative_estimate, floating_area, floating_measure, lambda_volume,
                                       symmetric_difference_volume)

DISK = ball(np.zeros(2), 1.0, 0.0)
HYP = ball(np.zeros(2), 1.0, -1.0)


def test_constant_c_n():
    assert constant_c_n(2) == pytest.approx(0.5 * 1.5 ** (2 / 3), rel=1e-15)
    assert constant_c_n(2) == pytest.approx(0.6551853, abs=1e-7)
    assert constant_c_n(3) == pytest.approx(0.5 * math.sqrt(4 / math.pi), rel=1e-15)
    assert constant_c_n(4) == pytest.approx(0.5 * (5 / (4 * math.pi / 3)) ** 0.4, rel=1e-15)
    with pytest.raises(ValueError):
        constant_c_n(1)


def test_lambda_volume():
    assert lambda_volume(DISK, 0.0) == pytest.approx(math.pi, rel=1e-15)
    assert lambda_volume(HYP, -1.0) == pytest.approx(2 * math.pi * (math.cosh(1) - 1), rel=1e-14)
    assert lambda_volume(ball(np.zeros(2), math.pi / 4, 1.0), 1.0) == pytest.approx(1.840302, abs=1e-6)
    # non-centred path goes through cap quadrature
    off = ball(np.array([0.2, 0.1]), 0.5, -1.0)
    assert lambda_volume(off, -1.0) == pytest.approx(2 * math.pi * (math.cosh(0.5) - 1), rel=1e-11)
    off3 = ball(np.array([0.2, 0.1, 0.0]), 0.5, 1.0)
    assert lambda_volume(off3, 1.0) == pytest.approx(math.pi * (1.0 - math.sin(1.0)), rel=1e-11)


def test_floating_area_examples():
    assert floating_area(DISK, 0.0).value == pytest.approx(2 * math.pi, rel=1e-14)
    for lam in (0.0, 1.0):
        assert floating_area(Polytope.box([1.0, 1.0]), lam).value == 0.0
    assert floating_area(Polytope.box([0.5, 0.5]), -1.0).value == 0.0
    rho = math.tanh(1)
    closed = 2 * math.pi * rho ** (2 / 3) / math.sqrt(1 - rho * rho)
    assert closed == pytest.approx(8.0856988, abs=1e-7)
    assert floating_area(HYP, -1.0).value == pytest.approx(closed, rel=1e-13)


def test_ball_closed_form():
    assert ball_floating_area_closed(1.0, 0.0, 2) == pytest.approx(2 * math.pi)
    assert ball_floating_area_closed(1.0, 0.0, 3) == pytest.approx(4 * math.pi)
    assert ball_floating_area_closed(1.0, -1.0, 2) == pytest.approx(8.0856988, abs=1e-7)
    assert floating_area(ball(np.zeros(3), 1.0, 0.0), 0.0).value == pytest.approx(4 * math.pi, rel=1e-10)
    for lam, a in [(-1.0, 0.7), (1.0, 0.5)]:
        assert floating_area(ball(np.zeros(3), a, lam), lam).value == pytest.approx(
            ball_floating_area_closed(a, lam, 3), rel=1e-10)


def test_off_centre_ball_matches_centred():
    # isometry invariance with an exact off-centre image
    for lam in (-1.0, 1.0):
        a = floating_area(ball(np.array([0.3, -0.2]), 0.6, lam), lam).value
        assert a == pytest.approx(ball_floating_area_closed(0.6, lam, 2), rel=1e-10)


def test_ellipse_affine_closed_form():
    for a, b in [(2.0, 0.5), (1.5, 0.6), (1.0, 0.3)]:
        E = ellipsoid([a, b])
        assert floating_area(E, 0.0).value == pytest.approx(2 * math.pi * (a * b) ** (1 / 3), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(-1.0, 1.0), st.floats(0.5, 2.0), st.floats(0, math.pi))
def test_equi_affine_invariance(shear, s, angle):
    A = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])
    A = A @ np.diag([s, 1 / s]) @ np.array([[1.0, shear], [0.0, 1.0]])
    E = ellipsoid([1.0, 0.4])
    assert floating_area(linear_image(E, A), 0.0).value == pytest.approx(floating_area(E, 0.0).value, rel=1e-6)


def test_floating_area_nonnegative_smooth():
    K = Smooth2D(0.8, ((2, 0.05, 0.0), (4, 0.01, 0.01)))
    for lam in (-1.0, 0.0, 1.0):
        res = floating_area(K, lam)
        assert res.value > 0
        assert res.quadrature_error <= 1e-10 * res.value


def test_floating_measure_regions():
    assert floating_measure(DISK, 0.0, lambda x: x[:, 0] >= 0) == pytest.approx(math.pi, rel=1e-12)
    K = ellipsoid([0.7, 0.4])
    total = floating_measure(K, -1.0)
    cuts = np.sort(np.random.default_rng(0).uniform(-math.pi, math.pi, 5))
    bounds = np.concatenate([[-math.pi], cuts, [math.pi + 1e-12]])
    parts = 0.0
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        parts += floating_measure(K, -1.0, lambda x, lo=lo, hi=hi: (np.arctan2(x[:, 1], x[:, 0]) >= lo)
                                  & (np.arctan2(x[:, 1], x[:, 0]) < hi))
    assert parts == pytest.approx(total, abs=1e-10)


def test_valuation_on_split_disk():
    for lam, B in [(0.0, DISK), (-1.0, HYP), (1.0, ball(np.zeros(2), math.pi / 6, 1.0))]:
        e1 = np.array([[1.0, 0.0]])
        K = TruncatedQuadric(B, e1, [0.3 * B.max_norm])
        L = TruncatedQuadric(B, -e1, [0.3 * B.max_norm])
        KL = TruncatedQuadric(B, np.vstack([e1, -e1]), [0.3 * B.max_norm] * 2)
        lhs = floating_area(K, lam).value + floating_area(L, lam).value
        rhs = floating_area(B, lam).value + floating_area(KL, lam).value
        assert lhs == pytest.approx(rhs, rel=1e-3)


def test_cone_volume_difference():
    assert cone_volume_difference(ball(np.zeros(2), 2.0, 0.0), DISK, 0.0) == pytest.approx(3 * math.pi, rel=1e-12)
    assert cone_volume_difference(DISK, DISK, 0.0) == pytest.approx(0.0, abs=1e-15)
    exact = 2 * math.pi * (math.cosh(1) - math.cosh(0.5))
    assert exact == pytest.approx(2.6103787, abs=1e-7)
    got = cone_volume_difference(HYP, ball(np.zeros(2), 0.5, -1.0), -1.0)
    assert got == pytest.approx(exact, rel=1e-12)
    with pytest.raises(BodyError):
        cone_volume_difference(DISK, ball(np.zeros(2), 2.0, 0.0), 0.0)


def test_cone_volume_difference_3d():
    big = ball(np.zeros(3), 0.8, -1.0)
    small = ellipsoid([0.3, 0.4, 0.2])
    got = cone_volume_difference(big, small, -1.0)
    assert got == pytest.approx(lambda_volume(big, -1.0) - lambda_volume(small, -1.0), rel=1e-7)


def test_symmetric_difference_volume():
    two = ball(np.zeros(2), 2.0, 0.0)
    est, err = symmetric_difference_volume(two, DISK, 0.0, samples=400_000, seed=1)
    assert abs(est - 3 * math.pi) <= 3 * err
    est, err = symmetric_difference_volume(DISK, DISK, 0.0, samples=10_000)
    assert est == 0.0 and err == 0.0
    E = ellipsoid([0.7, 0.5])
    F = floating_body(E, 0.05, -1.0)
    exact = cone_volume_difference(E, F.boundary, -1.0, check=False)
    est, err = symmetric_difference_volume(E, F.body, -1.0, samples=10**6, seed=2)
    # F.body is the outer Wulff polygon; its gap to the envelope is far below the MC error
    assert abs(est - exact) <= 3 * err


def test_derivative_estimate_validates_grid():
    with pytest.raises(ValueError):
        derivative_estimate(DISK, 0.0, [1e-2, 1e-3])
    with pytest.raises(ValueError):
        derivative_estimate(DISK, 0.0, [1e-3, 1e-2, 1e-4])


def test_derivative_estimate_disk_short_grid():
    r = derivative_estimate(DISK, 0.0, [4e-3, 2e-3, 1e-3, 5e-4, 2.5e-4], directions=None)
    assert r.target == pytest.approx(constant_c_n(2) * 2 * math.pi, rel=1e-13)
    assert r.relative_error <= 1e-3
    assert r.quotients == sorted(r.quotients)


def test_derivative_estimate_3d_ball():
    B = ball(np.zeros(3), 0.5, 0.0)
    r = derivative_estimate(B, 0.0, [4e-3, 2e-3, 1e-3, 5e-4], resolution=5120)
    assert r.relative_error <= 2e-2


def test_closed_form_against_mpmath():
    # radial integral of the density reproduces the closed-form hyperbolic area
    rho = mp.tanh(1)
    val = 2 * mp.pi * mp.quad(lambda t: t * (1 - t * t) ** -1.5, [0, rho])
    assert float(val) == pytest.approx(lambda_volume(HYP, -1.0), rel=1e-14)
