"""Euclidean model (B^n(lam), g^lam) of the real space form of curvature ``lam``.

Points are plain numpy arrays of Cartesian model coordinates.  Geodesics of
the model are Euclidean straight lines, so convexity is Euclidean convexity;
everything intrinsic (distances, volumes, normals, curvatures) is obtained
from the Euclidean data through the conversion factors below.

All functions broadcast over leading axes: a point array of shape ``(..., n)``
returns results of shape ``(...)`` (or ``(..., n)`` for vector outputs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

UNIT_TOL = 1e-12
GEOM_TOL = 1e-10
DEFAULT_RADIUS_CAP = 10.0


class DomainError(ValueError):
    """A point or parameter lies outside the domain of the model."""


@dataclass(frozen=True)
class SpaceForm:
    """Curvature ``lam`` and dimension ``n`` of the model space.

    For ``lam > 0`` the model only covers an open hemisphere, and points far
    from the origin are numerically useless; ``radius_cap`` bounds the
    Euclidean norm of admissible points for ``lam >= 0``.
    """

    lam: float
    n: int = 2
    radius_cap: float = DEFAULT_RADIUS_CAP

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.n}")
        if not math.isfinite(self.lam):
            raise ValueError("curvature must be finite")

    @property
    def model_radius(self) -> float:
        if self.lam < 0:
            return 1.0 / math.sqrt(-self.lam)
        return math.inf

    @property
    def admissible_radius(self) -> float:
        return min(self.model_radius, self.radius_cap)

    def contains(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        r = np.linalg.norm(p, axis=-1)
        if self.lam < 0:
            return r < self.model_radius
        return r <= self.radius_cap

    def check_point(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.n:
            raise ValueError(f"expected points in R^{self.n}, got shape {p.shape}")
        if not np.all(self.contains(p)):
            raise DomainError("point outside the model domain")
        return p


# -- tan^lam and its inverse --------------------------------------------------

def tan_lambda(alpha, lam: float):
    """tanh(sqrt(-lam) a)/sqrt(-lam), a, or tan(sqrt(lam) a)/sqrt(lam)."""
    alpha = np.asarray(alpha, dtype=float)
    if lam < 0:
        k = math.sqrt(-lam)
        out = np.tanh(k * alpha) / k
    elif lam == 0:
        out = alpha.copy()
    else:
        k = math.sqrt(lam)
        if np.any(np.abs(alpha) * k >= math.pi / 2):
            raise DomainError("tan_lambda: |alpha| must be < pi/(2 sqrt(lam))")
        out = np.tan(k * alpha) / k
    return out if out.ndim else float(out)


def atan_lambda(x, lam: float):
    """Inverse of :func:`tan_lambda` on the same branch."""
    x = np.asarray(x, dtype=float)
    if lam < 0:
        k = math.sqrt(-lam)
        if np.any(np.abs(x) * k >= 1.0):
            raise DomainError("atan_lambda: |x| must be < 1/sqrt(-lam)")
        out = np.arctanh(k * x) / k
    elif lam == 0:
        out = x.copy()
    else:
        k = math.sqrt(lam)
        out = np.arctan(k * x) / k
    return out if out.ndim else float(out)


def _scalar(a):
    return float(a) if np.ndim(a) == 0 else a


# -- metric, distances, densities ---------------------------------------------

def metric_eval(p, X, Y, lam: float):
    """g^lam(X, Y) at base point p."""
    p, X, Y = (np.asarray(a, dtype=float) for a in (p, X, Y))
    q = 1.0 + lam * np.sum(p * p, axis=-1)
    out = np.sum(X * Y, axis=-1) / q - lam * np.sum(X * p, axis=-1) * np.sum(Y * p, axis=-1) / q**2
    return _scalar(out)


def distance_to_origin(p, lam: float):
    return atan_lambda(np.linalg.norm(np.asarray(p, dtype=float), axis=-1), lam)


def _wedge_sq(p, q):
    # |p ^ q|^2 = |p|^2 |q - p|^2 - (p.(q - p))^2, stable for nearby points
    d = q - p
    out = np.sum(p * p, axis=-1) * np.sum(d * d, axis=-1) - np.sum(p * d, axis=-1) ** 2
    return np.maximum(out, 0.0)


def distance(p, q, lam: float):
    """Geodesic distance in (B^n(lam), g^lam).

    Uses the chordal form sin_lam(d)^2 = (|p-q|^2 + lam |p^q|^2) / D with
    D = (1 + lam|p|^2)(1 + lam|q|^2), which for lam = -1 is the usual
    cosh d = (1 - p.q)/sqrt(D) rewritten without cancellation.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    d = q - p
    num = np.sum(d * d, axis=-1) + lam * _wedge_sq(p, q)
    num = np.maximum(num, 0.0)
    den = (1.0 + lam * np.sum(p * p, axis=-1)) * (1.0 + lam * np.sum(q * q, axis=-1))
    if lam < 0:
        k = math.sqrt(-lam)
        out = np.arcsinh(k * np.sqrt(num / den)) / k
    elif lam == 0:
        out = np.sqrt(num)
    else:
        k = math.sqrt(lam)
        cos_part = (1.0 + lam * np.sum(p * q, axis=-1)) / np.sqrt(den)
        out = np.arctan2(k * np.sqrt(num / den), cos_part) / k
    return _scalar(out)


def volume_density(p, lam: float, n: int | None = None):
    """(1 + lam|p|^2)^(-(n+1)/2); ``n`` defaults to the point dimension."""
    p = np.asarray(p, dtype=float)
    n = p.shape[-1] if n is None else n
    return _scalar((1.0 + lam * np.sum(p * p, axis=-1)) ** (-(n + 1) / 2))


def exp_origin(X, lam: float):
    X = np.asarray(X, dtype=float)
    r = np.linalg.norm(X, axis=-1, keepdims=True)
    safe = np.where(r > 0, r, 1.0)
    scale = np.where(r > 0, np.asarray(tan_lambda(safe, lam)) / safe, 1.0)
    return X * scale


# -- boundary conversions ----------------------------------------------------

def normal_convert(x, Ne, lam: float):
    """g^lam-unit outer normal at x from the Euclidean outer unit normal."""
    x = np.asarray(x, dtype=float)
    Ne = np.asarray(Ne, dtype=float)
    xn = np.sum(x * Ne, axis=-1, keepdims=True)
    xx = np.sum(x * x, axis=-1, keepdims=True)
    scale = np.sqrt((1.0 + lam * xx) / (1.0 + lam * xn**2))
    return scale * (Ne + lam * xn * x)


def boundary_density(x, Ne, lam: float, n: int | None = None):
    """dvol^lam_bd / dvol^e_bd at a regular boundary point."""
    x = np.asarray(x, dtype=float)
    Ne = np.asarray(Ne, dtype=float)
    n = x.shape[-1] if n is None else n
    xn = np.sum(x * Ne, axis=-1)
    xx = np.sum(x * x, axis=-1)
    return _scalar(np.sqrt((1.0 + lam * xn**2) / (1.0 + lam * xx) ** n))


def curvature_convert(He, x, Ne, lam: float, n: int | None = None):
    """Gauss-Kronecker curvature w.r.t. g^lam from the Euclidean one."""
    x = np.asarray(x, dtype=float)
    Ne = np.asarray(Ne, dtype=float)
    n = x.shape[-1] if n is None else n
    xn = np.sum(x * Ne, axis=-1)
    xx = np.sum(x * x, axis=-1)
    return _scalar(np.asarray(He) * ((1.0 + lam * xx) / (1.0 + lam * xn**2)) ** ((n + 1) / 2))


# -- motions ------------------------------------------------------------------

def translation_matrix(a, lam: float) -> np.ndarray:
    """Homogeneous (n+1)x(n+1) matrix of the motion moving 0 to ``a``.

    x -> (a + x_par + sqrt(1 + lam|a|^2) x_perp) / (1 - lam a.x), where
    x_par/x_perp are the components of x parallel/orthogonal to a.  For
    lam = -1 this is the Klein-model boost; for lam = 0 a translation.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    aa = float(a @ a)
    T = np.eye(n + 1)
    if aa > 0:
        proj = np.outer(a, a) / aa
        s = 1.0 + lam * aa
        if s <= 0:
            raise DomainError("translation target outside the model domain")
        T[:n, :n] = proj + math.sqrt(s) * (np.eye(n) - proj)
    T[:n, n] = a
    T[n, :n] = -lam * a
    return T


def apply_projective(T: np.ndarray, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    y = x @ T[:n, :n].T + T[:n, n]
    w = x @ T[n, :n] + T[n, n]
    if np.any(w <= 0):
        raise DomainError("projective image leaves the model chart")
    return y / w[..., None]


def klein_translate(a, x, lam: float) -> np.ndarray:
    """Apply the motion taking the origin to ``a`` to the point(s) ``x``."""
    return apply_projective(translation_matrix(a, lam), x)
