"""Convex bodies in the Euclidean model with support, radial, chord and
boundary-curvature oracles.

Every body lives in Euclidean model coordinates.  Geodesic balls are
converted to their Euclidean image (an ellipsoid, or a Euclidean ball when
centred at the origin) on construction, so all downstream code sees only
Euclidean geometry plus the curvature parameter.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, HalfspaceIntersection

from . import spaceform as sf
from ._numerics import gauss_legendre, safeguarded_newton


class EmptyWulff(ValueError):
    """The halfspace intersection defining a Wulff shape is empty."""


class BodyError(ValueError):
    """Invalid body parameters."""


@dataclass(frozen=True)
class BoundarySample:
    x: np.ndarray
    normal: np.ndarray
    curvature: float
    weight: float


@dataclass(frozen=True)
class BoundarySamples:
    """Quadrature nodes on bd K for the Euclidean surface measure.

    Stored as parallel arrays; indexing yields :class:`BoundarySample`.
    """

    x: np.ndarray          # (m, n) boundary points
    normal: np.ndarray     # (m, n) Euclidean outer unit normals
    curvature: np.ndarray  # (m,) Euclidean Gauss-Kronecker curvature
    weight: np.ndarray     # (m,) Euclidean surface-measure weights

    def __len__(self):
        return len(self.weight)

    def __getitem__(self, i):
        return BoundarySample(self.x[i], self.normal[i], float(self.curvature[i]), float(self.weight[i]))

    def select(self, mask) -> "BoundarySamples":
        mask = np.asarray(mask, dtype=bool)
        return BoundarySamples(self.x[mask], self.normal[mask], self.curvature[mask], self.weight[mask])

    @staticmethod
    def concat(parts) -> "BoundarySamples":
        parts = [p for p in parts if len(p)]
        return BoundarySamples(
            np.concatenate([p.x for p in parts]),
            np.concatenate([p.normal for p in parts]),
            np.concatenate([p.curvature for p in parts]),
            np.concatenate([p.weight for p in parts]),
        )


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def _perp(v):
    """Rotate planar vectors by +90 degrees."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _chord_args(v, t):
    """Normalize chord inputs to v (d, 2), t (d, q); returns a reshaper for outputs."""
    v = np.asarray(v, dtype=float)
    t = np.asarray(t, dtype=float)
    if v.ndim == 1:
        shape = t.shape
        return v[None, :], t.reshape(1, -1), lambda a: a.reshape(shape)
    if t.ndim == 1:
        return v, t[:, None], lambda a: a[:, 0]
    return v, t, lambda a: a


def _angle(v):
    v = np.asarray(v, dtype=float)
    return np.arctan2(v[..., 1], v[..., 0])


def plane_frame(v):
    """Orthonormal (w1, w2) completing unit vectors v in R^3 to a frame."""
    v = np.asarray(v, dtype=float)
    helper = np.where(np.abs(v[..., :1]) < 0.9, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))
    w1 = _unit(helper - np.sum(helper * v, axis=-1, keepdims=True) * v)
    w2 = np.cross(v, w1)
    return w1, w2


class ConvexBody(ABC):
    """Common oracle interface.  ``radial`` assumes the origin is interior."""

    dim: int
    kind: str

    @abstractmethod
    def support(self, v) -> np.ndarray: ...

    @abstractmethod
    def radial(self, u) -> np.ndarray: ...

    @abstractmethod
    def contains(self, x, tol: float = 1e-12) -> np.ndarray: ...

    @abstractmethod
    def boundary_quadrature(self, resolution: int) -> BoundarySamples: ...

    def chord(self, v, t):
        """Planar bodies: s-interval of {t v + s perp(v)} inside K (lo > hi if empty)."""
        raise NotImplementedError(f"{self.kind}: chords need n == 2")

    def chord_below(self, v, depth):
        """Chord at height h_K(v) - depth as (lo, hi, hi - lo).

        Subclasses may compute the length relative to a boundary point so
        that it keeps full relative precision for tiny depths.
        """
        v, depth, out = _chord_args(v, depth)
        lo, hi = self.chord(v, self.support(v)[:, None] - depth)
        return out(lo), out(hi), out(hi - lo)

    def support_lambda(self, v, lam: float):
        """Geodesic distance from the origin to the supporting hyperplane: atan_lam(h_K(v))."""
        return sf.atan_lambda(self.support(v), lam)

    def height_breaks(self, v):
        """Heights x.v where the slab cross-section is non-smooth, or None."""
        return None

    @property
    def max_norm(self) -> float:
        """max |x| over K."""
        return float(np.max(self.support(direction_grid(self.dim, 4096 if self.dim == 2 else 2562))))

    def width(self, v):
        v = np.asarray(v, dtype=float)
        return self.support(v) + self.support(-v)

    def check_in(self, space: sf.SpaceForm):
        """Raise unless K is compactly contained in the admissible model domain."""
        if space.n != self.dim:
            raise BodyError(f"body dimension {self.dim} does not match space dimension {space.n}")
        if self.max_norm >= space.admissible_radius:
            raise sf.DomainError("body not compactly contained in the model domain")
        return self

    def to_spec(self) -> dict:
        raise NotImplementedError


# -- quadrics ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Quadric(ConvexBody):
    """Solid ellipsoid {c + S^(1/2) y : |y| <= 1} with shape matrix S."""

    center: np.ndarray
    shape: np.ndarray
    kind: str = "ellipsoid"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        c = np.asarray(self.center, dtype=float).reshape(-1)
        S = np.asarray(self.shape, dtype=float)
        if S.shape != (c.size, c.size):
            raise BodyError("shape matrix does not match center")
        S = 0.5 * (S + S.T)
        if np.min(np.linalg.eigvalsh(S)) <= 0:
            raise BodyError("shape matrix must be positive definite")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "shape", S)

    @property
    def dim(self):
        return self.center.size

    @cached_property
    def inv_shape(self):
        return np.linalg.inv(self.shape)

    @cached_property
    def det_shape(self):
        return float(np.linalg.det(self.shape))

    def _hc(self, v):
        return np.sqrt(np.einsum("...i,ij,...j->...", v, self.shape, v))

    def support(self, v):
        v = np.asarray(v, dtype=float)
        return v @ self.center + self._hc(v)

    @property
    def max_norm(self):
        if not np.any(self.center):
            return float(math.sqrt(np.max(np.linalg.eigvalsh(self.shape))))
        return super().max_norm

    def radial(self, u):
        u = np.asarray(u, dtype=float)
        Q, c = self.inv_shape, self.center
        a = np.einsum("...i,ij,...j->...", u, Q, u)
        b = u @ (Q @ c)
        c0 = c @ Q @ c - 1.0
        return (b + np.sqrt(b * b - a * c0)) / a

    def contains(self, x, tol=1e-12):
        d = np.asarray(x, dtype=float) - self.center
        return np.einsum("...i,ij,...j->...", d, self.inv_shape, d) <= 1.0 + tol

    def point_at_normal(self, u):
        """Boundary point with outer normal u and its Gauss-Kronecker curvature."""
        u = np.asarray(u, dtype=float)
        hc = self._hc(u)
        x = self.center + (u @ self.shape) / hc[..., None]
        curv = hc ** (self.dim + 1) / self.det_shape
        return x, curv

    def boundary_quadrature(self, resolution: int = 4096) -> BoundarySamples:
        if self.dim == 2:
            m = max(int(resolution), 4)
            th = 2 * math.pi * np.arange(m) / m
            u = np.stack([np.cos(th), np.sin(th)], axis=-1)
            dsig = np.full(m, 2 * math.pi / m)
        else:
            u, dsig = sphere_quadrature(resolution)
        x, curv = self.point_at_normal(u)
        return BoundarySamples(x, u, curv, dsig / curv)

    def chord(self, v, t):
        v, t, out = _chord_args(v, t)
        w = _perp(v)
        Q = self.inv_shape
        d = t[..., None] * v[:, None, :] - self.center
        a = np.einsum("di,ij,dj->d", w, Q, w)[:, None]
        b = np.einsum("di,ij,dqj->dq", w, Q, d)
        c0 = np.einsum("dqi,ij,dqj->dq", d, Q, d) - 1.0
        disc = b * b - a * c0
        root = np.sqrt(np.maximum(disc, 0.0))
        empty = disc < 0
        lo = np.where(empty, 1.0, (-b - root) / a)
        hi = np.where(empty, -1.0, (-b + root) / a)
        return out(lo), out(hi)

    def chord_below(self, v, depth):
        # relative to the apex p with normal v: the quadratic has no constant term
        v, depth, out = _chord_args(v, depth)
        w = _perp(v)
        Q = self.inv_shape
        hc = self._hc(v)[:, None]
        p, _ = self.point_at_normal(v)
        a = np.einsum("di,ij,dj->d", w, Q, w)[:, None]
        b = -depth * np.einsum("di,ij,dj->d", w, Q, v)[:, None]
        disc = depth * (2 * a / hc - depth * np.linalg.det(Q))
        root = np.sqrt(np.maximum(disc, 0.0))
        sp = np.sum(p * w, axis=1)[:, None]
        lo, hi = (-b - root) / a, (-b + root) / a
        return out(sp + lo), out(sp + hi), out(2 * root / a)

    def section_ellipse(self, v, w1, w2, t, depth=None):
        """Section by {x.v = t} in plane coordinates (x = t v + y1 w1 + y2 w2).

        Returns (y0, S2, r2): the section is {(y - y0)^T S2 (y - y0) <= r2}.
        Shapes: v, w1, w2 (..., 3); t (..., q).  ``depth`` = h_K(v) - t,
        when given, keeps r2 accurate for thin caps.
        """
        Q = self.inv_shape
        W = np.stack([w1, w2], axis=-1)                       # (..., 3, 2)
        S2 = np.einsum("...ia,ij,...jb->...ab", W, Q, W)        # (..., 2, 2)
        if depth is not None:
            hc = self._hc(v)[..., None]
            p, _ = self.point_at_normal(v)
            pW = np.einsum("...i,...ia->...a", p, W)
            shift = np.linalg.solve(S2, np.einsum("...ia,ij,...j->...a", W, Q, v)[..., None])[..., 0]
            y0 = pW[..., None, :] + depth[..., None] * shift[..., None, :]
            r2 = depth * (2.0 / hc - depth / hc**2)
            return y0, S2, r2
        d = t[..., None] * v[..., None, :] - self.center        # (..., q, 3)
        g = np.einsum("...ia,ij,...qj->...qa", W, Q, d)         # (..., q, 2)
        e = np.einsum("...qi,ij,...qj->...q", d, Q, d) - 1.0
        S2inv = np.linalg.inv(S2)
        y0 = -np.einsum("...ab,...qb->...qa", S2inv, g)
        r2 = np.einsum("...qa,...ab,...qb->...q", g, S2inv, g) - e
        return y0, S2, r2

    def to_spec(self):
        if self.kind == "ball" and self.meta:
            return {"type": "ball", **self.meta}
        if self.kind == "ellipsoid" and self.meta:
            return {"type": "ellipsoid", **self.meta}
        return {"type": "quadric", "center": self.center.tolist(), "shape": self.shape.tolist()}


def ellipsoid(semiaxes, rotation=None) -> Quadric:
    """Origin-centred ellipsoid with the given semiaxes (optionally rotated)."""
    ax = np.asarray(semiaxes, dtype=float)
    if np.any(ax <= 0):
        raise BodyError("semiaxes must be positive")
    S = np.diag(ax**2)
    if rotation is not None:
        R = np.asarray(rotation, dtype=float)
        S = R @ S @ R.T
    meta = {"semiaxes": ax.tolist()}
    if rotation is not None:
        meta["rotation"] = np.asarray(rotation, dtype=float).tolist()
    return Quadric(np.zeros(ax.size), S, kind="ellipsoid", meta=meta)


def ball(center, radius: float, lam: float) -> Quadric:
    """Model image of the geodesic ball B_lam(center, radius).

    Centred at the origin this is the Euclidean ball of radius
    tan_lambda(radius).  Off-centre balls become ellipsoids: from the
    distance formula, d(x, p) <= r iff
    x^T A x - 2 s p.x <= (s - P)/lam with s = 1 + lam rho^2,
    P = 1 + lam|p|^2, A = P I - lam s p p^T, rho = tan_lambda(r).
    """
    p = np.asarray(center, dtype=float).reshape(-1)
    n = p.size
    if radius <= 0:
        raise BodyError("geodesic radius must be positive")
    rho = sf.tan_lambda(radius, lam)
    meta = {"center": p.tolist(), "radius": float(radius), "lambda": float(lam)}
    if lam == 0 or not np.any(p):
        return Quadric(p.copy(), rho**2 * np.eye(n), kind="ball", meta=meta)
    pp = float(p @ p)
    s = 1.0 + lam * rho * rho
    P = 1.0 + lam * pp
    if P <= 0:
        raise sf.DomainError("ball centre outside the model domain")
    A = P * np.eye(n) - lam * s * np.outer(p, p)
    if np.min(np.linalg.eigvalsh(A)) <= 0:
        raise sf.DomainError("geodesic ball does not fit in the model chart")
    Ainv = np.linalg.inv(A)
    c = s * Ainv @ p
    k = (rho * rho - pp) + s * s * (p @ Ainv @ p)
    return Quadric(c, k * Ainv, kind="ball", meta=meta)


def transform_quadric(K: Quadric, T: np.ndarray) -> Quadric:
    """Image of a quadric body under the projective map with homogeneous matrix T."""
    n = K.dim
    Q = K.inv_shape
    c = K.center
    H = np.zeros((n + 1, n + 1))
    H[:n, :n] = Q
    H[:n, n] = H[n, :n] = -Q @ c
    H[n, n] = c @ Q @ c - 1.0
    Ti = np.linalg.inv(T)
    H2 = Ti.T @ H @ Ti
    A = H2[:n, :n]
    b = H2[:n, n]
    e = H2[n, n]
    if np.min(np.linalg.eigvalsh(0.5 * (A + A.T))) <= 0:
        raise sf.DomainError("image of the quadric is unbounded")
    Ainv = np.linalg.inv(A)
    c2 = -Ainv @ b
    k = b @ Ainv @ b - e
    return Quadric(c2, k * Ainv, kind="quadric")


def linear_image(K: Quadric, A) -> Quadric:
    A = np.asarray(A, dtype=float)
    return Quadric(A @ K.center, A @ K.shape @ A.T, kind="quadric")


# -- polytopes ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Polytope(ConvexBody):
    """Bounded polytope {x : A x <= b} with unit rows of A (n = 2 or 3)."""

    normals: np.ndarray
    offsets: np.ndarray
    vertices: np.ndarray
    simplices: np.ndarray | None = None  # (k, 3) boundary triangles for n = 3
    kind: str = "polytope"

    @property
    def dim(self):
        return self.vertices.shape[1]

    @classmethod
    def from_halfspaces(cls, normals, offsets) -> "Polytope":
        A = np.asarray(normals, dtype=float)
        b = np.asarray(offsets, dtype=float)
        norms = np.linalg.norm(A, axis=1)
        A = A / norms[:, None]
        b = b / norms
        n = A.shape[1]
        if n not in (2, 3):
            raise BodyError("polytopes are supported for n = 2, 3 only")
        centre, radius = _chebyshev_center(A, b)
        if radius <= 1e-12:
            raise EmptyWulff("halfspace intersection has empty interior")
        hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), centre)
        return cls.from_vertices(hs.intersections)

    @classmethod
    def from_vertices(cls, points) -> "Polytope":
        pts = np.asarray(points, dtype=float)
        hull = ConvexHull(pts)
        V = pts[hull.vertices]
        if pts.shape[1] == 2:
            # hull.vertices is ccw in 2-D
            E = np.roll(V, -1, axis=0) - V
            N = _unit(np.stack([E[:, 1], -E[:, 0]], axis=1))
            b = np.sum(N * V, axis=1)
            return cls(N, b, V, None)
        eq = hull.equations
        # keep one row per distinct facet plane
        key = np.round(eq, 10)
        _, idx = np.unique(key, axis=0, return_index=True)
        eq = eq[np.sort(idx)]
        remap = {old: new for new, old in enumerate(hull.vertices)}
        simp = np.vectorize(remap.get)(hull.simplices)
        return cls(eq[:, :3], -eq[:, 3], V, simp)

    @classmethod
    def regular_polygon(cls, m: int, radius: float = 1.0, phase: float = 0.0) -> "Polytope":
        th = phase + 2 * math.pi * np.arange(m) / m
        return cls.from_vertices(radius * np.stack([np.cos(th), np.sin(th)], axis=1))

    @classmethod
    def box(cls, half_widths) -> "Polytope":
        hw = np.asarray(half_widths, dtype=float)
        n = hw.size
        A = np.vstack([np.eye(n), -np.eye(n)])
        return cls.from_halfspaces(A, np.concatenate([hw, hw]))

    def support(self, v):
        v = np.asarray(v, dtype=float)
        return np.max(v @ self.vertices.T, axis=-1)

    def radial(self, u):
        u = np.asarray(u, dtype=float)
        au = u @ self.normals.T
        with np.errstate(divide="ignore"):
            r = np.where(au > 1e-300, self.offsets / au, np.inf)
        return np.min(r, axis=-1)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        return np.all(x @ self.normals.T <= self.offsets + tol, axis=-1)

    @property
    def max_norm(self):
        return float(np.max(np.linalg.norm(self.vertices, axis=1)))

    @cached_property
    def edges(self) -> np.ndarray:
        if self.dim == 2:
            k = len(self.vertices)
            return np.stack([np.arange(k), (np.arange(k) + 1) % k], axis=1)
        e = np.concatenate([self.simplices[:, [0, 1]], self.simplices[:, [1, 2]], self.simplices[:, [2, 0]]])
        return np.unique(np.sort(e, axis=1), axis=0)

    def boundary_quadrature(self, resolution: int = 4096) -> BoundarySamples:
        if self.dim == 2:
            V = self.vertices
            W = np.roll(V, -1, axis=0)
            lengths = np.linalg.norm(W - V, axis=1)
            per = np.maximum(2, np.round(resolution * lengths / lengths.sum()).astype(int))
            parts = []
            for p, q, L, m in zip(V, W, lengths, per):
                s, w = gauss_legendre(int(m))
                nrm = _unit(np.array([q[1] - p[1], p[0] - q[0]]))
                parts.append(BoundarySamples(p + s[:, None] * (q - p), np.tile(nrm, (m, 1)), np.zeros(m), L * w))
            return BoundarySamples.concat(parts)
        tri = self.vertices[self.simplices]
        nodes, wts = triangle_rule(max(1, int(round(math.sqrt(resolution / (2 * len(tri)))))))
        A, B, C = tri[:, 0], tri[:, 1], tri[:, 2]
        area2 = np.linalg.norm(np.cross(B - A, C - A), axis=1)
        X = A[:, None] + nodes[None, :, :1] * (B - A)[:, None] + nodes[None, :, 1:] * (C - A)[:, None]
        N = _unit(np.cross(B - A, C - A))
        cen = self.vertices.mean(axis=0)
        N = np.where((np.sum(N * (A - cen), axis=1) < 0)[:, None], -N, N)
        m = nodes.shape[0]
        return BoundarySamples(
            X.reshape(-1, 3),
            np.repeat(N, m, axis=0),
            np.zeros(len(tri) * m),
            (area2[:, None] * wts[None, :]).reshape(-1),
        )

    def chord(self, v, t):
        v, t, out = _chord_args(v, t)
        lo, hi = _halfspace_chord(v @ self.normals.T, _perp(v) @ self.normals.T, self.offsets, t)
        return out(lo), out(hi)

    def chord_below(self, v, depth):
        # measure from the apex vertex: active constraints have zero slack there
        v, depth, out = _chord_args(v, depth)
        j = np.argmax(v @ self.vertices.T, axis=1)
        p = self.vertices[j]                                  # (d, 2)
        w = _perp(v)
        Av = v @ self.normals.T
        slack = self.offsets - p @ self.normals.T             # (d, F), >= 0
        rhs = slack[:, None, :] + depth[..., None] * Av[:, None, :]
        a = np.broadcast_to((w @ self.normals.T)[:, None, :], rhs.shape)
        lo, hi = _interval_from_constraints(a, rhs)
        sp = np.sum(p * w, axis=1)[:, None]
        return out(sp + lo), out(sp + hi), out(hi - lo)

    def height_breaks(self, v):
        return np.asarray(v, dtype=float) @ self.vertices.T

    def section_breaks(self, v, w1, t):
        """y1-coordinates of section-polygon vertices (NaN where an edge misses the plane).

        Shapes: v, w1 (d, 3); t (d, q) -> (d, q, E).
        """
        P = self.vertices[self.edges[:, 0]]
        Qv = self.vertices[self.edges[:, 1]]
        hp = v @ P.T                                  # (d, E)
        hq = v @ Qv.T
        with np.errstate(divide="ignore", invalid="ignore"):
            lam = (t[..., None] - hp[:, None, :]) / (hq - hp)[:, None, :]
        ok = (lam >= 0) & (lam <= 1) & np.isfinite(lam)
        lam = np.where(ok, lam, 0.0)
        y_p = w1 @ P.T
        y_q = w1 @ Qv.T
        y = y_p[:, None, :] + lam * (y_q - y_p)[:, None, :]
        return np.where(ok, y, np.nan)

    def section_chord(self, v, w1, w2, t, y1):
        """y2-interval of the section {x.v = t} at y1.  Shapes: (d, 3); t, y1 (d, ...)."""
        Av = v @ self.normals.T       # (d, F)
        A1 = w1 @ self.normals.T
        A2 = w2 @ self.normals.T
        extra = t.ndim - 1
        sh = (slice(None),) + (None,) * extra + (slice(None),)
        rhs = self.offsets - t[..., None] * Av[sh] - y1[..., None] * A1[sh]
        a = np.broadcast_to(A2[sh], rhs.shape)
        return _interval_from_constraints(a, rhs)

    def to_spec(self):
        return {"type": "polytope", "vertices": self.vertices.tolist()}


def _interval_from_constraints(a, rhs, eps=1e-15):
    """Solve a_i s <= rhs_i over the last axis; returns (lo, hi), lo > hi if empty."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = rhs / a
    hi = np.min(np.where(a > eps, r, np.inf), axis=-1)
    lo = np.max(np.where(a < -eps, r, -np.inf), axis=-1)
    bad = np.any((np.abs(a) <= eps) & (rhs < 0), axis=-1)
    return np.where(bad, 1.0, lo), np.where(bad, -1.0, hi)


def _halfspace_chord(Av, Aw, b, t):
    """Cyrus-Beck clipping of {t v + s w} against rows (A v) t + (A w) s <= b.

    Av, Aw: (d, F); t: (d, q) -> (lo, hi) of shape (d, q).
    """
    rhs = b - t[..., None] * Av[:, None, :]
    a = np.broadcast_to(Aw[:, None, :], rhs.shape)
    return _interval_from_constraints(a, rhs)


def _chebyshev_center(A, b):
    n = A.shape[1]
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([A, np.linalg.norm(A, axis=1)[:, None]])
    res = linprog(c, A_ub=A_ub, b_ub=b, bounds=[(None, None)] * n + [(0, None)], method="highs")
    if res.status != 0:
        if res.status == 2:
            raise EmptyWulff("halfspace intersection is empty")
        if res.status == 3:
            raise BodyError("halfspace intersection is unbounded")
        raise BodyError(f"Chebyshev centre LP failed: {res.message}")
    return res.x[:n], res.x[n]


# -- smooth planar bodies ----------------------------------------------------

@dataclass(frozen=True, eq=False)
class Smooth2D(ConvexBody):
    """Planar body with support function a0 + sum_k (a_k cos k t + b_k sin k t), k >= 2.

    ``terms`` is a sequence of (k, a_k, b_k).  The first harmonic is excluded
    so that the origin is the Steiner point.
    """

    a0: float
    terms: tuple = ()
    kind: str = "smooth2d"

    def __post_init__(self):
        terms = tuple((int(k), float(a), float(b)) for k, a, b in self.terms)
        if any(k < 2 for k, _, _ in terms):
            raise BodyError("harmonics must have order k >= 2")
        object.__setattr__(self, "terms", terms)
        th = np.linspace(0, 2 * math.pi, 8192, endpoint=False)
        h, _, h2 = self.h(th)
        if np.min(h + h2) <= 0:
            raise BodyError("h + h'' must be positive (strict convexity)")
        if np.min(h) <= 0:
            raise BodyError("origin must be interior (h > 0)")

    dim = 2

    @cached_property
    def _coef(self):
        if not self.terms:
            return np.zeros(0), np.zeros(0), np.zeros(0)
        k, a, b = (np.array(c, dtype=float) for c in zip(*self.terms))
        return k, a, b

    def h(self, theta):
        """Support function and its first two derivatives at angles theta."""
        theta = np.asarray(theta, dtype=float)
        k, a, b = self._coef
        kt = theta[..., None] * k
        c, s = np.cos(kt), np.sin(kt)
        h = self.a0 + c @ a + s @ b
        h1 = (-s * k) @ a + (c * k) @ b
        h2 = (-c * k * k) @ a + (-s * k * k) @ b
        return h, h1, h2

    def point(self, theta):
        h, h1, h2 = self.h(theta)
        u = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return h[..., None] * u + h1[..., None] * _perp(u), h + h2

    def support(self, v):
        return self.h(_angle(v))[0]

    @property
    def max_norm(self):
        x, _ = self.point(np.linspace(0, 2 * math.pi, 8192, endpoint=False))
        return float(np.max(np.linalg.norm(x, axis=1)))

    def radial(self, u):
        phi = _angle(u)

        def f(th):
            h, h1, h2 = self.h(th)
            x = np.stack([h * np.cos(th) - h1 * np.sin(th), h * np.sin(th) + h1 * np.cos(th)], axis=-1)
            ang = np.arctan2(np.cos(phi) * x[..., 1] - np.sin(phi) * x[..., 0],
                             np.cos(phi) * x[..., 0] + np.sin(phi) * x[..., 1])
            r2 = np.sum(x * x, axis=-1)
            return ang, (h + h2) * h / r2

        th, _, _ = safeguarded_newton(f, phi - 0.5 * math.pi, phi + 0.5 * math.pi, x0=phi)
        x, _ = self.point(th)
        return np.linalg.norm(x, axis=-1)

    def contains(self, x, tol=1e-12):
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        safe = np.where(r[..., None] > 0, x, np.array([1.0, 0.0]))
        return r <= self.radial(_unit(safe)) * (1 + tol) + tol

    def boundary_quadrature(self, resolution: int = 4096) -> BoundarySamples:
        m = max(int(resolution), 8)
        th = 2 * math.pi * np.arange(m) / m
        x, rho = self.point(th)
        u = np.stack([np.cos(th), np.sin(th)], axis=-1)
        return BoundarySamples(x, u, 1.0 / rho, rho * 2 * math.pi / m)

    def chord(self, v, t):
        v, t, out = _chord_args(v, t)
        tv = _angle(v)[:, None] + 0.0 * t
        hv = self.h(tv)[0]
        hm = self.h(tv + math.pi)[0]
        tc = np.clip(t, -hm, hv)

        def g(th, sign):
            h, h1, h2 = self.h(th)
            d = th - tv
            val = h * np.cos(d) - h1 * np.sin(d) - tc
            der = -(h + h2) * np.sin(d)
            return sign * val, sign * der

        # x(th).v decreases on [tv, tv + pi] and increases on [tv + pi, tv + 2 pi]
        th1, _, _ = safeguarded_newton(lambda th: g(th, -1.0), tv, tv + math.pi)
        th2, _, _ = safeguarded_newton(lambda th: g(th, 1.0), tv + math.pi, tv + 2 * math.pi)
        w = _perp(v)[:, None, :]
        s1 = np.sum(self.point(th1)[0] * w, axis=-1)
        s2 = np.sum(self.point(th2)[0] * w, axis=-1)
        empty = (t > hv) | (t < -hm)
        lo = np.where(empty, 1.0, np.minimum(s1, s2))
        hi = np.where(empty, -1.0, np.maximum(s1, s2))
        return out(lo), out(hi)

    def to_spec(self):
        return {"type": "smooth2d", "a0": self.a0, "terms": [list(t) for t in self.terms]}


# -- truncated quadrics (planar) --------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedQuadric(ConvexBody):
    """Planar quadric intersected with halfspaces {x : a.x <= b}.

    Boundary = arcs of the quadric (curved) plus straight segments (flat).
    """

    base: Quadric
    normals: np.ndarray
    offsets: np.ndarray
    kind: str = "truncated"

    def __post_init__(self):
        if self.base.dim != 2:
            raise BodyError("truncated quadrics are planar")
        A = np.atleast_2d(np.asarray(self.normals, dtype=float))
        b = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        nr = np.linalg.norm(A, axis=1)
        object.__setattr__(self, "normals", A / nr[:, None])
        object.__setattr__(self, "offsets", b / nr)
        if not self.arcs and not self.segments:
            raise BodyError("empty truncated body")

    dim = 2

    def _feasible(self, x, tol=1e-12):
        return np.all(np.asarray(x) @ self.normals.T <= self.offsets + tol, axis=-1)

    @cached_property
    def arcs(self) -> list[tuple[float, float]]:
        """Normal-angle intervals [t0, t1] of the quadric boundary kept in the body."""
        K = self.base
        cuts = []
        for a, b in zip(self.normals, self.offsets):
            lo, hi = K.chord(a, np.array([b]))
            lo, hi = float(lo[0]), float(hi[0])
            if lo <= hi:
                for s in (lo, hi):
                    x = b * a + s * _perp(a)
                    # outer normal of the quadric at x
                    g = K.inv_shape @ (x - K.center)
                    cuts.append(math.atan2(g[1], g[0]) % (2 * math.pi))
        if not cuts:
            x, _ = K.point_at_normal(np.array([1.0, 0.0]))
            return [(0.0, 2 * math.pi)] if self._feasible(x) else []
        cuts = np.sort(np.array(cuts))
        ends = np.append(cuts, cuts[0] + 2 * math.pi)
        arcs = []
        for t0, t1 in zip(ends[:-1], ends[1:]):
            if t1 - t0 < 1e-14:
                continue
            mid = 0.5 * (t0 + t1)
            x, _ = K.point_at_normal(np.array([math.cos(mid), math.sin(mid)]))
            if self._feasible(x):
                arcs.append((float(t0), float(t1)))
        return arcs

    @cached_property
    def segments(self) -> list[tuple[np.ndarray, np.ndarray, np.ndarray]]:
        """(start, end, outer normal) of each flat boundary piece."""
        out = []
        for i, (a, b) in enumerate(zip(self.normals, self.offsets)):
            lo, hi = self.base.chord(a, np.array([b]))
            lo, hi = float(lo[0]), float(hi[0])
            if lo > hi:
                continue
            others = np.delete(np.arange(len(self.offsets)), i)
            w = _perp(a)
            if len(others):
                A = self.normals[others]
                l2, h2 = _interval_from_constraints(A @ w, self.offsets[others] - b * (A @ a))
                lo, hi = max(lo, float(l2)), min(hi, float(h2))
            if hi - lo > 1e-14:
                out.append((b * a + lo * w, b * a + hi * w, a.copy()))
        return out

    @cached_property
    def junctions(self) -> np.ndarray:
        pts = [p for s in self.segments for p in s[:2]]
        return np.array(pts).reshape(-1, 2)

    def support(self, v):
        v = np.asarray(v, dtype=float)
        x, _ = self.base.point_at_normal(v)
        hq = np.where(self._feasible(x, 1e-10), np.sum(x * v, axis=-1), -np.inf)
        if len(self.junctions):
            hq = np.maximum(hq, np.max(v @ self.junctions.T, axis=-1))
        return hq

    def radial(self, u):
        u = np.asarray(u, dtype=float)
        au = u @ self.normals.T
        with np.errstate(divide="ignore"):
            r = np.where(au > 1e-300, self.offsets / au, np.inf)
        return np.minimum(self.base.radial(u), np.min(r, axis=-1))

    def contains(self, x, tol=1e-12):
        return self.base.contains(x, tol) & self._feasible(x, tol)

    @property
    def max_norm(self):
        return float(np.max(self.support(direction_grid(2, 8192))))

    def boundary_quadrature(self, resolution: int = 4096) -> BoundarySamples:
        parts = []
        total = sum(t1 - t0 for t0, t1 in self.arcs) + 1e-300
        for t0, t1 in self.arcs:
            m = max(8, int(round(resolution * (t1 - t0) / total)))
            s, w = gauss_legendre(m)
            th = t0 + (t1 - t0) * s
            u = np.stack([np.cos(th), np.sin(th)], axis=-1)
            x, curv = self.base.point_at_normal(u)
            parts.append(BoundarySamples(x, u, curv, (t1 - t0) * w / curv))
        for p, q, nrm in self.segments:
            m = max(4, resolution // 16)
            s, w = gauss_legendre(m)
            parts.append(BoundarySamples(p + s[:, None] * (q - p), np.tile(nrm, (m, 1)), np.zeros(m),
                                         np.linalg.norm(q - p) * w))
        return BoundarySamples.concat(parts)

    def chord(self, v, t):
        v, t, out = _chord_args(v, t)
        lo, hi = self.base.chord(v, t)
        l2, h2 = _halfspace_chord(v @ self.normals.T, _perp(v) @ self.normals.T, self.offsets, t)
        return out(np.maximum(lo, l2)), out(np.minimum(hi, h2))

    def height_breaks(self, v):
        if not len(self.junctions):
            return None
        return np.asarray(v, dtype=float) @ self.junctions.T

    def to_spec(self):
        return {"type": "truncated", "base": self.base.to_spec(),
                "normals": self.normals.tolist(), "offsets": self.offsets.tolist()}


# -- direction grids, quadrature on spheres and triangles -------------------

def icosphere_mesh(level: int) -> tuple[np.ndarray, np.ndarray]:
    """Vertices and outward-oriented triangles of a subdivided icosahedron."""
    t = (1 + math.sqrt(5)) / 2
    V = [(-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0), (0, -1, t), (0, 1, t),
         (0, -1, -t), (0, 1, -t), (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1)]
    F = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11), (1, 5, 9), (5, 11, 4),
         (11, 10, 2), (10, 7, 6), (7, 1, 8), (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8),
         (3, 8, 9), (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = [np.array(v, dtype=float) / np.linalg.norm(v) for v in V]
    for _ in range(level):
        cache = {}

        def mid(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        F2 = []
        for a, b, c in F:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            F2 += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        F = F2
    return np.array(verts), np.array(F)


def direction_grid(n: int, count: int | None = None) -> np.ndarray:
    """Unit directions: uniform angles (n = 2) or a subdivided icosahedron (n = 3).

    For n = 3 the smallest subdivision level with at least ``count`` vertices
    is used (12, 42, 162, 642, 2562, ...).
    """
    if n == 2:
        m = 2048 if count is None else int(count)
        th = 2 * math.pi * np.arange(m) / m
        return np.stack([np.cos(th), np.sin(th)], axis=1)
    if n == 3:
        want = 1280 if count is None else int(count)
        level = 0
        while 10 * 4**level + 2 < want:
            level += 1
        return icosphere_mesh(level)[0]
    raise ValueError("direction grids are implemented for n = 2, 3")


def sphere_quadrature(resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Product Gauss-Legendre (in z) x trapezoid (in azimuth) rule on S^2."""
    m = max(4, int(round(math.sqrt(resolution / 2))))
    z, wz = np.polynomial.legendre.leggauss(m)
    k = 2 * m
    ph = 2 * math.pi * np.arange(k) / k
    Z, PH = np.meshgrid(z, ph, indexing="ij")
    r = np.sqrt(1 - Z**2)
    u = np.stack([r * np.cos(PH), r * np.sin(PH), Z], axis=-1).reshape(-1, 3)
    w = (wz[:, None] * np.full(k, 2 * math.pi / k)[None, :]).reshape(-1)
    return u, w


def triangle_rule(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Collapsed Gauss rule on the reference triangle; weights sum to 1/2."""
    x, w = gauss_legendre(max(1, m))
    X, Y = np.meshgrid(x, x, indexing="ij")
    W = np.outer(w, w)
    # Duffy: (s, t) = (X, (1 - X) Y), Jacobian (1 - X)
    s = X
    t = (1 - X) * Y
    return np.stack([s.ravel(), t.ravel()], axis=1), (W * (1 - X)).ravel()


# -- Wulff shapes and Hausdorff distance --------------------------------------

def wulff_shape(directions, values) -> Polytope:
    """Halfspace intersection of {y : y.v <= f(v)} over the sampled directions."""
    V = np.asarray(directions, dtype=float)
    f = np.asarray(values, dtype=float)
    if len(V) < V.shape[1] + 1:
        raise ValueError("need at least n + 1 directions")
    try:
        return Polytope.from_halfspaces(V, f)
    except EmptyWulff:
        raise
    except BodyError as exc:
        if "unbounded" in str(exc):
            raise ValueError("directions do not positively span R^n") from exc
        raise


def hausdorff_distance(K: ConvexBody, L: ConvexBody, directions=None) -> float:
    """max_v |h_K(v) - h_L(v)| over a direction grid."""
    V = direction_grid(K.dim) if directions is None else np.asarray(directions, dtype=float)
    return float(np.max(np.abs(K.support(V) - L.support(V))))


def body_from_spec(spec: dict, lam: float, n: int) -> ConvexBody:
    """Build a body from its JSON description (see the CLI module for the schema)."""
    kind = spec.get("type")
    if kind == "ball":
        center = spec.get("center", [0.0] * n)
        return ball(center, float(spec["radius"]), lam)
    if kind == "ellipsoid":
        return ellipsoid(spec["semiaxes"], spec.get("rotation"))
    if kind == "quadric":
        return Quadric(np.asarray(spec["center"], float), np.asarray(spec["shape"], float), kind="quadric")
    if kind == "polytope":
        if "vertices" in spec:
            return Polytope.from_vertices(spec["vertices"])
        return Polytope.from_halfspaces(spec["normals"], spec["offsets"])
    if kind == "smooth2d":
        return Smooth2D(float(spec["a0"]), tuple(tuple(t) for t in spec.get("terms", ())))
    if kind == "truncated":
        base = body_from_spec(spec["base"], lam, n)
        return TruncatedQuadric(base, spec["normals"], spec["offsets"])
    raise BodyError(f"unknown body type {kind!r}")
