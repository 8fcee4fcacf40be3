"""lam-floating area, lam-volumes, cone-volume differences and the
right-derivative of the floating-body volume.

In the Euclidean model the floating area is the boundary integral of
He^(1/(n+1)) (1 + lam|x|^2)^(-(n-1)/2) against the Euclidean surface
measure, He being the Euclidean Gauss-Kronecker curvature.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import minimize_scalar

from . import spaceform as sf
from ._numerics import radial_mass, unit_ball_volume
from .bodies import BodyError, ConvexBody, Polytope, Quadric, direction_grid, icosphere_mesh, triangle_rule
from .capvolume import FloatingEnvelope, cap_depths, floating_body, lambda_measure

DEFAULT_RESOLUTION = {2: 4096, 3: 20480}
FIT_EXPONENT_RANGE = (0.4, 1.2)
MESH_RESOLUTION = 5120

Region = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FloatingAreaResult:
    value: float
    quadrature_error: float
    region: Region | None = field(default=None, repr=False)


@dataclass(frozen=True)
class ConvergenceReport:
    """Quotients (vol(K) - vol(F_delta K))/delta and their extrapolation.

    ``relative_error`` is |limit - target|/target, or the absolute error
    when the target is zero (polytopes).
    """

    delta_grid: list[float]
    quotients: list[float]
    extrapolated_limit: float
    target: float
    relative_error: float
    fit_exponent: float
    fit_slope: float

    def to_dict(self) -> dict:
        return asdict(self)


def constant_c_n(n: int) -> float:
    """c_n = 1/2 ((n+1)/kappa_(n-1))^(2/(n+1))."""
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    return 0.5 * ((n + 1) / unit_ball_volume(n - 1)) ** (2.0 / (n + 1))


def _centred_ball_radius(K: ConvexBody, lam: float):
    meta = getattr(K, "meta", None) or {}
    if K.kind == "ball" and meta.get("lambda") == lam and not np.any(meta.get("center", [1.0])):
        return float(sf.tan_lambda(meta["radius"], lam))
    return None


def lambda_volume(K: ConvexBody, lam: float) -> float:
    """mu(K) = int_K (1 + lam|x|^2)^(-(n+1)/2) dx."""
    K.check_in(sf.SpaceForm(lam, K.dim))
    rho = _centred_ball_radius(K, lam)
    if rho is not None:
        n = K.dim
        return float(n * unit_ball_volume(n) * radial_mass(0.0, rho, lam, n))
    return lambda_measure(K, lam)


def ball_floating_area_closed(alpha: float, lam: float, n: int) -> float:
    """Floating area of a geodesic ball of radius alpha about the origin."""
    rho = float(sf.tan_lambda(alpha, lam))
    return n * unit_ball_volume(n) * rho ** ((n - 1) * n / (n + 1)) * (1 + lam * rho * rho) ** (-(n - 1) / 2)


def _area_sum(K, lam, omega, resolution):
    S = K.boundary_quadrature(resolution)
    x = S.x
    f = np.where(S.curvature > 0, S.curvature, 0.0) ** (1.0 / (K.dim + 1))
    f = f * (1.0 + lam * np.sum(x * x, axis=1)) ** (-(K.dim - 1) / 2)
    if omega is not None:
        f = np.where(np.asarray(omega(x), dtype=bool), f, 0.0)
    return float(np.sum(f * S.weight))


def floating_area(K: ConvexBody, lam: float, omega: Region | None = None,
                  resolution: int | None = None) -> FloatingAreaResult:
    """Omega^lam(K, omega) by boundary quadrature.

    The quadrature error estimate is the change when the resolution is
    halved.  Flat pieces (polytope facets) have zero curvature and
    contribute nothing.
    """
    K.check_in(sf.SpaceForm(lam, K.dim))
    if isinstance(K, Polytope):
        return FloatingAreaResult(0.0, 0.0, omega)
    res = DEFAULT_RESOLUTION[K.dim] if resolution is None else int(resolution)
    fine = _area_sum(K, lam, omega, res)
    coarse = _area_sum(K, lam, omega, res // 2)
    return FloatingAreaResult(fine, abs(fine - coarse), omega)


def floating_measure(K: ConvexBody, lam: float, omega: Region | None = None,
                     resolution: int | None = None) -> float:
    return floating_area(K, lam, omega, resolution).value


def cone_volume_difference(K: ConvexBody, L, lam: float, resolution: int | None = None,
                           check: bool = True) -> float:
    """vol^lam(K \\ L) for L inside K with the origin interior to L.

    Integrates over bd K, in polar form about the origin, the radial
    lam-mass between the boundaries of L and K.  ``L`` needs ``radial``
    (and ``support`` when ``check`` is set).
    """
    n = K.dim
    if check:
        V = direction_grid(n, 512 if n == 2 else 642)
        if np.any(L.support(V) > K.support(V) + 1e-12):
            raise BodyError("L is not contained in K")
        if np.any(L.support(V) + L.support(-V) <= 0) or np.any(L.support(V) <= 0):
            raise BodyError("origin is not interior to L")
    res = DEFAULT_RESOLUTION[n] if resolution is None else int(resolution)
    S = K.boundary_quadrature(res)
    r = np.linalg.norm(S.x, axis=1)
    u = S.x / r[:, None]
    rL = np.minimum(L.radial(u), r)
    cone = np.sum(S.x * S.normal, axis=1) / r**n
    return float(np.sum(S.weight * cone * radial_mass(rL, r, lam, n)))


def _mesh_cone_volume(X, faces, lam: float, order: int = 4) -> float:
    """lam-volume of the cone from the origin over a closed triangulated surface."""
    P = X[faces]
    e1, e2 = P[:, 1] - P[:, 0], P[:, 2] - P[:, 0]
    cr = np.cross(e1, e2)
    height = np.sum(P[:, 0] * cr, axis=1)                 # (x . n) |cr|
    if lam == 0:
        return float(np.sum(height) / 6.0)
    st, w = triangle_rule(order)
    pts = P[:, None, 0] + st[None, :, :1] * e1[:, None] + st[None, :, 1:] * e2[:, None]
    r = np.linalg.norm(pts, axis=2)
    g = radial_mass(0.0, r, lam, 3) / r**3
    return float(np.sum(height * (g @ w)))


def _mesh_level(resolution):
    res = MESH_RESOLUTION if resolution is None else int(resolution)
    level = 1
    while 20 * 4**level < res:
        level += 1
    return level


def volume_loss_3d(K: ConvexBody, delta: float, lam: float, mu: float | None = None,
                   resolution: int | None = None) -> float:
    """vol^lam(K) - vol^lam(F_delta K) in R^3 from triangulated touching points.

    The touching points x_F(v) and, for quadrics, the boundary points x_K(v)
    with the same normals are triangulated on an icosphere mesh of normals.
    Their chordal errors are nearly equal and cancel in the difference; the
    remaining O(h^2) term is removed by Richardson extrapolation between two
    mesh levels.  Only quadrics are supported: for polytopes the touching
    points cluster near edges and vertices and the mesh volume is unreliable.
    """
    if not isinstance(K, Quadric):
        raise NotImplementedError("the 3-D volume loss needs a quadric body")
    mu = lambda_measure(K, lam) if mu is None else mu
    level = _mesh_level(resolution)
    losses = []
    for lev in (level - 1, level):
        V, faces = icosphere_mesh(lev)
        D, _, nodes = cap_depths(K, V, delta, lam, mu=mu)
        env = FloatingEnvelope(K, delta, lam, mu, nodes)
        _, XF = env._touching(V, D)
        XK = K.point_at_normal(V)[0]
        losses.append(_mesh_cone_volume(XK, faces, lam) - _mesh_cone_volume(XF, faces, lam))
    return (4.0 * losses[1] - losses[0]) / 3.0


def _fit_power_law(delta, q, p0):
    """Least squares q = q0 + q1 delta^p, p in FIT_EXPONENT_RANGE."""
    delta = np.asarray(delta, dtype=float)
    q = np.asarray(q, dtype=float)

    def solve(p):
        A = np.stack([np.ones_like(delta), delta**p], axis=1)
        coef, *_ = np.linalg.lstsq(A, q, rcond=None)
        return coef, float(np.sum((A @ coef - q) ** 2))

    lo, hi = FIT_EXPONENT_RANGE
    grid = np.linspace(lo, hi, 33)
    p_best = min(grid, key=lambda p: solve(p)[1])
    if solve(p0)[1] <= solve(p_best)[1]:
        p_best = p0
    step = grid[1] - grid[0]
    opt = minimize_scalar(lambda p: solve(p)[1], bounds=(max(lo, p_best - step), min(hi, p_best + step)),
                          method="bounded", options={"xatol": 1e-6})
    p = float(opt.x) if opt.fun <= solve(p_best)[1] else float(p_best)
    coef, _ = solve(p)
    return float(coef[0]), float(coef[1]), p


def derivative_estimate(K: ConvexBody, lam: float, delta_grid, directions=None,
                        resolution: int | None = None, workers: int = 1) -> ConvergenceReport:
    """Quotients (vol(K) - vol(F_delta K))/delta on a decreasing grid, extrapolated to 0.

    The planar volume loss is vol(K \\ F_delta K) by :func:`cone_volume_difference`
    on the traced envelope; in R^3 it comes from :func:`volume_loss_3d`.  The
    target is c_n Omega^lam(K).
    """
    deltas = [float(d) for d in delta_grid]
    if len(deltas) < 3 or any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise ValueError("delta_grid must be strictly decreasing with at least 3 entries")
    K.check_in(sf.SpaceForm(lam, K.dim))
    mu = lambda_measure(K, lam)
    n = K.dim

    def quotient(delta):
        if n == 3:
            return volume_loss_3d(K, delta, lam, mu=mu, resolution=resolution) / delta
        F = floating_body(K, delta, lam, directions=directions, mu=mu)
        return cone_volume_difference(K, F.boundary, lam, resolution=resolution, check=False) / delta

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            quotients = list(pool.map(quotient, deltas))
    else:
        quotients = [quotient(d) for d in deltas]
    q0, q1, p = _fit_power_law(deltas, quotients, 2.0 / (n + 1))
    target = constant_c_n(n) * floating_area(K, lam, resolution=resolution).value
    err = abs(q0 - target) / target if target > 0 else abs(q0 - target)
    return ConvergenceReport(deltas, [float(q) for q in quotients], q0, float(target), float(err), p, q1)


def symmetric_difference_volume(K: ConvexBody, L: ConvexBody, lam: float, samples: int = 10**6,
                                seed=0) -> tuple[float, float]:
    """Monte-Carlo estimate of vol^lam(K \\ L) + vol^lam(L \\ K) and its standard error."""
    n = K.dim
    E = np.eye(n)
    lows = np.minimum(-K.support(-E), -L.support(-E))
    highs = np.maximum(K.support(E), L.support(E))
    box = float(np.prod(highs - lows))
    rng = np.random.default_rng(seed)
    total = total_sq = 0.0
    done = 0
    while done < samples:
        k = min(200_000, samples - done)
        x = rng.uniform(lows, highs, size=(k, n))
        inside = np.asarray(K.contains(x, tol=0.0)) ^ np.asarray(L.contains(x, tol=0.0))
        f = np.where(inside, sf.volume_density(x, lam, n), 0.0)
        total += f.sum()
        total_sq += (f * f).sum()
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return box * mean, box * math.sqrt(var / samples)
