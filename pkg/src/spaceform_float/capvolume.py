"""Weighted cap measures, cap-depth solves and floating bodies.

For a direction v and depth D the cap of K is K n {x : x.v >= h_K(v) - D}.
Its lam-volume is integrated slab by slab (Fubini): the weighted measure of
each cross-section {x.v = t} is evaluated in closed form along chords
(n = 2) or by a chord quadrature (n = 3), and the slab variable t is
integrated with Gauss-Legendre under a sin^2 substitution that absorbs the
square-root behaviour at tangency.  Piecewise-linear bodies contribute
their vertex heights as breakpoints.

The boundary point of the floating body with outer normal v is the
lam-weighted centroid of the cutting section (differentiate the cap
measure with respect to v); :class:`FloatingEnvelope` uses this to evaluate
the exact radial function of the floating body on demand.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import spaceform as sf
from ._numerics import QuadratureError, RootFindingError, safeguarded_newton, sin2_map
from .bodies import (ConvexBody, EmptyWulff, Polytope, Quadric, _perp, direction_grid,
                     plane_frame, wulff_shape)

log = logging.getLogger(__name__)

DEFAULT_NODES = 24
MAX_NODES = 384


class OutOfRange(ValueError):
    """delta^((n+1)/2) is not below the lam-volume of the body."""


# -- closed-form chord integrals --------------------------------------------

def _chord_mass_2d(lo, hi, L, t, lam):
    """int_lo^hi (1 + lam(t^2 + s^2))^(-3/2) ds and the first moment in s.

    Both are written as multiples of the chord length L = hi - lo, so short
    chords keep the relative precision of L.
    """
    empty = ~(L > 0)
    lo = np.where(empty, 0.0, lo)
    hi = np.where(empty, 0.0, hi)
    a = 1.0 + lam * t * t
    sl = np.sqrt(a + lam * lo * lo)
    sh = np.sqrt(a + lam * hi * hi)
    mass = L * (sl - lam * lo * (hi + lo) / (sl + sh)) / (a * sl * sh)
    moment = L * (hi + lo) / (sl * sh * (sl + sh))
    return np.where(empty, 0.0, mass), np.where(empty, 0.0, moment)


def _atanc(z):
    """atan(sqrt z)/sqrt z for z >= 0, atanh(sqrt(-z))/sqrt(-z) for z < 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-6
    zs = np.where(small, 1.0, z)
    r = np.sqrt(np.abs(zs))
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = np.arctan(r) / r
        neg = np.arctanh(r) / r
    series = 1.0 - z / 3.0 + z * z / 5.0
    return np.where(small, series, np.where(z > 0, pos, neg))


def _chord_mass_3d(lo, hi, b, lam):
    """int_lo^hi (b + lam y^2)^(-2) dy and the first moment in y."""

    def F(y):
        B = b + lam * y * y
        return y / (2 * b * B) + (y / b) * _atanc(lam * y * y / b) / (2 * b)

    mass = F(hi) - F(lo)
    moment = (hi * hi - lo * lo) / (2 * (b + lam * lo * lo) * (b + lam * hi * hi))
    empty = ~(hi > lo)
    return np.where(empty, 0.0, mass), np.where(empty, 0.0, moment)


# -- section integrals -------------------------------------------------------

def section_mass(K: ConvexBody, V, T, lam: float, moments: bool = False, nodes: int = DEFAULT_NODES,
                 depth=None):
    """Weighted measure of the sections K n {x.v = t}.

    V: (d, n) unit directions, T: (d, q) heights.  Returns W (d, q) and, if
    requested, the first moments (d, q, n) of the sections as vectors in R^n
    (the component along v excluded).  ``depth`` = h_K(v) - T, when given,
    lets quadrics and planar bodies compute thin sections without cancellation.
    """
    V = np.asarray(V, dtype=float)
    T = np.asarray(T, dtype=float)
    n = V.shape[1]
    if n == 2:
        if depth is None:
            lo, hi = K.chord(V, T)
            L = hi - lo
        else:
            lo, hi, L = K.chord_below(V, np.asarray(depth, dtype=float))
        W, M = _chord_mass_2d(lo, hi, L, T, lam)
        if moments:
            return W, M[..., None] * _perp(V)[:, None, :]
        return W
    if n == 3:
        return _section_mass_3d(K, V, T, lam, moments, nodes, depth)
    raise NotImplementedError("section integrals are implemented for n = 2, 3")


def _section_mass_3d(K, V, T, lam, moments, nodes, depth=None):
    w1, w2 = plane_frame(V)
    s, ws = sin2_map(nodes)
    if isinstance(K, Quadric):
        y0, S2, r2 = K.section_ellipse(V, w1, w2, T, None if depth is None else np.asarray(depth, dtype=float))
        S2inv = np.linalg.inv(S2)
        e1 = np.sqrt(np.maximum(r2, 0.0) * S2inv[:, None, 0, 0])            # (d, q)
        Y1 = y0[..., 0, None] + e1[..., None] * (2 * s - 1)                  # (d, q, m)
        dy = 2 * e1[..., None] * ws
        d1 = Y1 - y0[..., 0, None]
        S11, S12, S22 = S2[:, 0, 0], S2[:, 0, 1], S2[:, 1, 1]
        det = (S11 * S22 - S12 * S12)[:, None, None]
        c2 = y0[..., 1, None] - (S12 / S22)[:, None, None] * d1
        half = np.sqrt(np.maximum(r2[..., None] - d1 * d1 * det / S22[:, None, None], 0.0) / S22[:, None, None])
        lo, hi = c2 - half, c2 + half
        empty = (r2 <= 0)[..., None]
    elif isinstance(K, Polytope):
        return _section_mass_polytope3d(K, V, w1, w2, T, lam, moments, nodes)
    else:
        raise NotImplementedError(f"{K.kind}: 3-D sections not available")
    b = 1.0 + lam * (T[..., None] ** 2 + Y1 * Y1)
    mass, mom2 = _chord_mass_3d(lo, hi, b, lam)
    mass = np.where(empty, 0.0, mass)
    W = np.sum(mass * dy, axis=-1)
    if not moments:
        return W
    m1 = np.sum(Y1 * mass * dy, axis=-1)
    m2 = np.sum(np.where(empty, 0.0, mom2) * dy, axis=-1)
    return W, m1[..., None] * w1[:, None, :] + m2[..., None] * w2[:, None, :]


def _section_mass_polytope3d(K, V, w1, w2, T, lam, moments, nodes):
    br = K.section_breaks(V, w1, T)                         # (d, q, E)
    lo_all = np.nanmin(np.where(np.isnan(br), np.inf, br), axis=-1)
    hi_all = np.nanmax(np.where(np.isnan(br), -np.inf, br), axis=-1)
    valid = np.isfinite(lo_all) & np.isfinite(hi_all) & (hi_all > lo_all)
    lo_all = np.where(valid, lo_all, 0.0)
    hi_all = np.where(valid, hi_all, 0.0)
    br = np.where(np.isnan(br), hi_all[..., None], br)
    edges = np.sort(np.concatenate([lo_all[..., None], br, hi_all[..., None]], axis=-1), axis=-1)
    a, b_ = edges[..., :-1], edges[..., 1:]                 # (d, q, P)
    from ._numerics import gauss_legendre
    x, w = gauss_legendre(max(4, nodes // 2))
    Y1 = a[..., None] + (b_ - a)[..., None] * x              # (d, q, P, m)
    dy = (b_ - a)[..., None] * w
    d_, q_, P_, m_ = Y1.shape
    Tb = np.broadcast_to(T[:, :, None, None], Y1.shape)
    lo, hi = K.section_chord(V, w1, w2, Tb.reshape(d_, -1), Y1.reshape(d_, -1))
    lo, hi = lo.reshape(Y1.shape), hi.reshape(Y1.shape)
    bb = 1.0 + lam * (Tb**2 + Y1**2)
    mass, mom2 = _chord_mass_3d(lo, hi, bb, lam)
    W = np.sum(mass * dy, axis=(-1, -2)) * valid
    if not moments:
        return W
    m1 = np.sum(Y1 * mass * dy, axis=(-1, -2)) * valid
    m2 = np.sum(mom2 * dy, axis=(-1, -2)) * valid
    return W, m1[..., None] * w1[:, None, :] + m2[..., None] * w2[:, None, :]


# -- cap measure ----------------------------------------------------------------

def _cap_nodes(K, V, h, D, nodes):
    """Depth nodes for caps {h - D <= x.v <= h}.

    Returns heights T, depths R = h - T and weights, each (d, P*m); P
    pieces split the slab at vertex heights of piecewise-linear bodies.
    """
    s, ws = sin2_map(nodes)
    br = K.height_breaks(V)
    if br is None:
        edges = np.stack([np.zeros_like(D), D], axis=1)
    else:
        # breaks outside the open slab collapse onto the bottom; keep live pieces
        r = h[:, None] - br
        inside = (r > 0) & (r < D[:, None])
        r = np.where(inside, r, D[:, None])
        k = int(inside.sum(axis=1).max()) if r.size else 0
        edges = np.sort(np.concatenate([np.zeros_like(D)[:, None], r, D[:, None]], axis=1), axis=1)[:, :k + 2]
    a, b = edges[:, :-1], edges[:, 1:]
    R = a[..., None] + (b - a)[..., None] * s
    Wt = (b - a)[..., None] * ws
    d = len(h)
    R = R.reshape(d, -1)
    return h[:, None] - R, R, Wt.reshape(d, -1)


def _cap_measure_batch(K, V, D, lam, nodes, h=None):
    h = K.support(V) if h is None else h
    T, R, Wt = _cap_nodes(K, V, h, D, nodes)
    return np.sum(section_mass(K, V, T, lam, depth=R) * Wt, axis=1)


def cap_measure(K: ConvexBody, v, depth, lam: float, rtol: float = 1e-10, nodes: int = DEFAULT_NODES):
    """lam-volume of K n {x : x.v >= h_K(v) - depth}.

    ``v`` may be a single direction or an array (d, n) with matching depths.
    The Gauss-Legendre order is doubled until two successive values agree
    to ``rtol``.
    """
    V = np.atleast_2d(np.asarray(v, dtype=float))
    D = np.broadcast_to(np.asarray(depth, dtype=float), (len(V),)).copy()
    if np.any(D < 0):
        raise ValueError("depth must be nonnegative")
    D = np.minimum(D, K.width(V))
    h = K.support(V)
    m = nodes
    prev = _cap_measure_batch(K, V, D, lam, m, h)
    while True:
        m *= 2
        cur = _cap_measure_batch(K, V, D, lam, m, h)
        if np.all(np.abs(cur - prev) <= rtol * np.maximum(np.abs(cur), 1e-300)):
            break
        if m >= MAX_NODES:
            raise QuadratureError(f"cap measure did not reach rtol={rtol} with {m} nodes")
        prev = cur
    out = np.where(D > 0, cur, 0.0)
    return float(out[0]) if np.ndim(depth) == 0 and np.ndim(v) == 1 else out


def lambda_measure(K: ConvexBody, lam: float, rtol: float = 1e-12) -> float:
    """mu(K) as the cap of full width in the first coordinate direction."""
    e = np.zeros(K.dim)
    e[0] = 1.0
    return float(cap_measure(K, e, float(K.width(e)), lam, rtol=rtol))


def cap_measure_mc(K: ConvexBody, v, depth: float, lam: float, samples: int = 10**6, seed=0):
    """Monte-Carlo estimate of the cap measure; returns (estimate, standard error).

    Uniform samples in the cap's bounding box (in the frame of v), rejected
    outside K, weighted by the volume density.
    """
    v = np.asarray(v, dtype=float)
    n = v.size
    if depth <= 0:
        return 0.0, 0.0
    rng = np.random.default_rng(seed)
    h = float(K.support(v))
    depth = min(depth, float(K.width(v)))
    if n == 2:
        frame = [_perp(v)]
    else:
        frame = list(plane_frame(v))
    lows = [h - depth] + [-float(K.support(-w)) for w in frame]
    highs = [h] + [float(K.support(w)) for w in frame]
    box_vol = float(np.prod(np.subtract(highs, lows)))
    total = 0.0
    total_sq = 0.0
    done = 0
    chunk = 200_000
    while done < samples:
        k = min(chunk, samples - done)
        c = rng.uniform(lows, highs, size=(k, n))
        x = c[:, :1] * v + sum(c[:, i + 1:i + 2] * w for i, w in enumerate(frame))
        f = np.where(K.contains(x, tol=0.0), sf.volume_density(x, lam, n), 0.0)
        total += f.sum()
        total_sq += (f * f).sum()
        done += k
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    return box_vol * mean, box_vol * math.sqrt(var / samples)


# -- cap depth -----------------------------------------------------------------

def _solve_depths(K, V, target, lam, nodes, h, w, x0=None, xtol=1e-12):
    # Newton on log G(e^u) = log target: caps scale like powers of the depth,
    # which makes the iteration nearly linear
    log_target = math.log(target)
    last = {}

    def func(u):
        D = np.exp(u)
        T, R, Wt = _cap_nodes(K, V, h, D, nodes)
        G = np.sum(section_mass(K, V, T, lam, depth=R) * Wt, axis=1)
        dG = section_mass(K, V, (h - D)[:, None], lam, depth=D[:, None])[:, 0]
        last["res"] = G - target
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(G) - log_target, dG * D / G

    u_hi = np.log(w)
    u0 = None if x0 is None else np.log(np.clip(x0, 1e-300, w))
    u, _, _ = safeguarded_newton(func, u_hi - 200.0, u_hi, x0=u0, xtol=xtol, ftol=1e-14, maxiter=200)
    return np.exp(u), last["res"]


def cap_depths(K: ConvexBody, V, delta: float, lam: float, mu: float | None = None,
               rtol: float = 1e-9, nodes: int = DEFAULT_NODES, x0=None):
    """Depths s_delta(v) for each row of V, with residuals |G - delta^((n+1)/2)|.

    Raises :class:`OutOfRange` unless 0 < delta^((n+1)/2) < mu(K).
    """
    V = np.atleast_2d(np.asarray(V, dtype=float))
    n = V.shape[1]
    if delta <= 0:
        raise OutOfRange("delta must be positive")
    target = delta ** ((n + 1) / 2)
    if mu is None:
        K.check_in(sf.SpaceForm(lam, n))
        mu = lambda_measure(K, lam)
    if not target < mu:
        raise OutOfRange(f"delta^((n+1)/2) = {target:.6g} is not below mu(K) = {mu:.6g}")
    h = K.support(V)
    w = K.width(V)
    if x0 is None:
        # small-cap scaling of a smooth boundary; Newton corrects the rest
        x0 = w * (target / mu) ** (2.0 / (n + 1))
    m = nodes
    D, res = _solve_depths(K, V, target, lam, m, h, w, x0=x0)
    while True:
        # accept once doubling the quadrature order leaves G(D) unchanged
        G2 = _cap_measure_batch(K, V, D, lam, 2 * m, h)
        res = G2 - target
        if np.all(np.abs(res) <= min(rtol * target, 1e-11 * mu) + 1e-15 * mu):
            break
        if 2 * m > MAX_NODES:
            raise QuadratureError("cap depth did not stabilise under quadrature refinement")
        m *= 2
        D, res = _solve_depths(K, V, target, lam, m, h, w, x0=D)
    return D, np.abs(res), m


def cap_depth_solve(K: ConvexBody, v, delta: float, lam: float, mu: float | None = None) -> float:
    """s_delta(v): depth at which the cap in direction v has measure delta^((n+1)/2)."""
    D, _, _ = cap_depths(K, np.asarray(v, dtype=float), delta, lam, mu=mu)
    return float(D[0])


# -- floating bodies -------------------------------------------------------------

@dataclass(frozen=True)
class CapDepthProfile:
    delta: float
    directions: np.ndarray
    depths: np.ndarray
    residuals: np.ndarray
    support: np.ndarray  # h_K on the grid

    @property
    def values(self) -> np.ndarray:
        """h_K(v) - s_delta(v): the Wulff profile of the floating body."""
        return self.support - self.depths


class FloatingEnvelope:
    """Boundary of F_delta K traced by its touching points.

    For a normal v the boundary point is ``(h_K(v) - s(v)) v + c(v)`` with
    c(v) the lam-weighted centroid of the cutting section.  In the plane the
    radial function interpolates these points on a normal grid by quadratic
    Bezier arcs whose control points are the Wulff vertices (error of order
    (grid step)^4 on smooth arcs).  ``radial_exact`` instead finds the normal
    whose touching point lies on the requested ray by Newton iteration.
    """

    def __init__(self, K: ConvexBody, delta: float, lam: float, mu: float, nodes: int,
                 directions=None, depths=None):
        self.K = K
        self.delta = delta
        self.lam = lam
        self.mu = mu
        self.nodes = nodes
        self.dim = K.dim
        self.target = delta ** ((K.dim + 1) / 2)
        self._samples = None
        if self.dim == 2 and directions is not None:
            self._set_samples(np.asarray(directions, dtype=float), np.asarray(depths, dtype=float))

    def profile(self, V):
        """Profile values h_K - s_delta and depths s_delta for normals V (d, n)."""
        h = self.K.support(V)
        w = self.K.width(V)
        x0 = w * (self.target / self.mu) ** (2.0 / (self.dim + 1))
        D, _ = _solve_depths(self.K, V, self.target, self.lam, self.nodes, h, w, x0=x0)
        return h - D, D

    def points(self, V):
        """Envelope points for normals V (d, n)."""
        f, D = self.profile(V)
        W, M = section_mass(self.K, V, f[:, None], self.lam, moments=True, nodes=self.nodes,
                            depth=D[:, None])
        return f[:, None] * V + M[:, 0] / W[:, :1]

    def support(self, V):
        return self.profile(np.atleast_2d(np.asarray(V, dtype=float)))[0]

    # -- planar interpolation -------------------------------------------------

    def _touching(self, V, D):
        f = self.K.support(V) - D
        W, M = section_mass(self.K, V, f[:, None], self.lam, moments=True, nodes=self.nodes,
                            depth=D[:, None])
        return f, f[:, None] * V + M[:, 0] / W[:, :1]

    def _set_samples(self, V, D, max_rounds=80):
        theta = np.arctan2(V[:, 1], V[:, 0])
        order = np.argsort(theta)
        theta, D = theta[order], D[order]
        f, P = self._touching(V[order], D)
        # bisect normal intervals whose touching points are far apart: near
        # kinks of the floating body a tiny turn of the normal sweeps a long arc
        L_max = 4 * math.pi * self.K.max_norm / max(len(theta), 64)
        for _ in range(max_rounds):
            t_next = np.append(theta[1:], theta[0] + 2 * math.pi)
            gap = np.linalg.norm(np.roll(P, -1, axis=0) - P, axis=1)
            split = (gap > L_max) & (t_next - theta > 1e-13)
            if not split.any():
                break
            tm = 0.5 * (theta[split] + t_next[split])
            Vm = np.stack([np.cos(tm), np.sin(tm)], axis=1)
            fm, Dm = self.profile(Vm)
            _, Pm = self._touching(Vm, Dm)
            theta = np.concatenate([theta, np.mod(tm + math.pi, 2 * math.pi) - math.pi])
            f = np.concatenate([f, fm])
            P = np.concatenate([P, Pm])
            order = np.argsort(theta)
            theta, f, P = theta[order], f[order], P[order]
        V = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        # Wulff vertex between consecutive support lines
        V1, f1 = np.roll(V, -1, axis=0), np.roll(f, -1)
        det = V[:, 0] * V1[:, 1] - V[:, 1] * V1[:, 0]
        Q = np.stack([f * V1[:, 1] - f1 * V[:, 1], V[:, 0] * f1 - V1[:, 0] * f], axis=1) / det[:, None]
        phi = np.unwrap(np.arctan2(P[:, 1], P[:, 0]))
        phi = np.maximum.accumulate(phi)
        self._samples = (P, Q, phi)

    def _ensure_samples(self):
        if self._samples is None:
            V = default_directions(2)
            f, D = self.profile(V)
            self._set_samples(V, D)
        return self._samples

    def radial(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if self.dim != 2:
            return self.radial_exact(U)
        P, Q, phi = self._ensure_samples()
        N = len(P)
        ang = np.arctan2(U[:, 1], U[:, 0])
        ang = phi[0] + np.mod(ang - phi[0], 2 * math.pi)
        j = np.clip(np.searchsorted(phi, ang, side="right") - 1, 0, N - 1)
        P0, Qj, P1 = P[j], Q[j], P[(j + 1) % N]
        cross = lambda X: X[:, 0] * U[:, 1] - X[:, 1] * U[:, 0]
        c0, cq, c1 = cross(P0), cross(Qj), cross(P1)
        A = c0 - 2 * cq + c1
        B = 2 * (cq - c0)
        C = c0
        disc = np.sqrt(np.maximum(B * B - 4 * A * C, 0.0))
        q = -0.5 * (B + np.where(B >= 0, disc, -disc))
        with np.errstate(divide="ignore", invalid="ignore"):
            r1, r2 = q / A, C / q
        ok1 = np.isfinite(r1) & (r1 >= -1e-9) & (r1 <= 1 + 1e-9)
        tau = np.where(ok1, r1, r2)
        tau = np.where(np.isfinite(tau), np.clip(tau, 0.0, 1.0), 0.0)
        X = ((1 - tau) ** 2)[:, None] * P0 + (2 * tau * (1 - tau))[:, None] * Qj + (tau * tau)[:, None] * P1
        return np.sum(X * U, axis=1)

    def contains(self, x, tol=1e-12):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        safe = np.where(r > 0, r, 1.0)
        return r <= self.radial(x / safe[:, None]) * (1 + tol)

    # -- exact radial function --------------------------------------------

    def radial_exact(self, U):
        U = np.atleast_2d(np.asarray(U, dtype=float))
        if self.dim == 2:
            return self._radial_exact_2d(U)
        return self._radial_exact_nd(U)

    def _radial_exact_2d(self, U):
        phi = np.arctan2(U[:, 1], U[:, 0])
        eps = 1e-7

        def ang(th):
            V = np.stack([np.cos(th), np.sin(th)], axis=1)
            x = self.points(V)
            return np.arctan2(np.cos(phi) * x[:, 1] - np.sin(phi) * x[:, 0],
                              np.cos(phi) * x[:, 0] + np.sin(phi) * x[:, 1])

        def func(th):
            a = ang(th)
            return a, (ang(th + eps) - a) / eps

        th, _, _ = safeguarded_newton(func, phi - 0.5 * math.pi, phi + 0.5 * math.pi, x0=phi, xtol=1e-11)
        V = np.stack([np.cos(th), np.sin(th)], axis=1)
        f = self.profile(V)[0]
        return f / np.cos(th - phi)

    def _radial_exact_nd(self, U, iters=30):
        V = U.copy()
        w1, w2 = plane_frame(U)
        eps = 1e-6
        for _ in range(iters):
            x = self.points(V)
            r = np.stack([np.sum(x * w1, 1), np.sum(x * w2, 1)], axis=1) / np.sum(x * U, 1)[:, None]
            cols = []
            for w in (w1, w2):
                Vp = V + eps * w
                Vp /= np.linalg.norm(Vp, axis=1, keepdims=True)
                xp = self.points(Vp)
                rp = np.stack([np.sum(xp * w1, 1), np.sum(xp * w2, 1)], axis=1) / np.sum(xp * U, 1)[:, None]
                cols.append((rp - r) / eps)
            J = np.stack(cols, axis=2)
            step = np.linalg.solve(J, r[..., None])[..., 0]
            V = V - step[:, :1] * w1 - step[:, 1:] * w2
            V /= np.linalg.norm(V, axis=1, keepdims=True)
            if np.max(np.abs(step)) < 1e-11:
                break
        f = self.profile(V)[0]
        return f / np.sum(V * U, axis=1)


@dataclass(frozen=True)
class FloatingBodyResult:
    body: Polytope | None
    profile: CapDepthProfile
    empty: bool = False
    envelope: FloatingEnvelope | None = field(default=None, repr=False)

    @property
    def boundary(self):
        """Most accurate radial oracle: the traced envelope in the plane, else the polytope."""
        return self.envelope if self.profile.directions.shape[1] == 2 else self.body


def default_directions(n: int) -> np.ndarray:
    return direction_grid(n, 2048 if n == 2 else 1280)


def floating_body(K: ConvexBody, delta: float, lam: float, directions=None,
                  mu: float | None = None, allow_empty: bool = False) -> FloatingBodyResult:
    """F_delta^lam K as the Wulff shape of h_K - s_delta on a direction grid.

    ``body`` is the halfspace-intersection polytope over the grid (an outer
    approximation); ``envelope`` traces the boundary through touching points.
    """
    V = default_directions(K.dim) if directions is None else np.asarray(directions, dtype=float)
    if mu is None:
        K.check_in(sf.SpaceForm(lam, K.dim))
        mu = lambda_measure(K, lam)
    D, res, nodes = cap_depths(K, V, delta, lam, mu=mu)
    profile = CapDepthProfile(delta, V, D, res, K.support(V))
    env = FloatingEnvelope(K, delta, lam, mu, nodes, directions=V, depths=D)
    try:
        body = wulff_shape(V, profile.values)
    except EmptyWulff:
        if not allow_empty:
            raise
        return FloatingBodyResult(None, profile, True, env)
    return FloatingBodyResult(body, profile, False, env)


def sandwich_deltas(delta: float, lam: float, dist_origin_p: float, alpha: float, beta: float):
    """Euclidean floating-body parameters bracketing F_delta^lam K.

    delta1 = delta (1 + lam tan_lam(d - alpha)^2), delta2 = delta (1 + lam tan_lam(d + beta)^2)
    with d the distance from the origin to the ball centre p.
    """
    if not 0 <= alpha < beta:
        raise ValueError("need 0 <= alpha < beta")
    t1 = sf.tan_lambda(dist_origin_p - alpha, lam)
    t2 = sf.tan_lambda(dist_origin_p + beta, lam)
    return delta * (1.0 + lam * t1 * t1), delta * (1.0 + lam * t2 * t2)
