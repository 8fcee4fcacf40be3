"""Small vectorized numerical kernels shared by the geometry modules."""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln


class QuadratureError(RuntimeError):
    """Requested accuracy not reached at the maximum quadrature order."""


class RootFindingError(RuntimeError):
    pass


@lru_cache(maxsize=None)
def gauss_legendre(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(m)
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def sin2_map(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes s in [0, 1] and weights for int_0^1 f(s) ds with s = sin^2(pi tau/2).

    The substitution removes square-root endpoint behaviour at both ends,
    which is what chord lengths of smooth bodies exhibit near tangency.
    """
    tau, w = gauss_legendre(m)
    s = np.sin(0.5 * math.pi * tau) ** 2
    ds = 0.5 * math.pi * np.sin(math.pi * tau)
    return s, w * ds


def unit_ball_volume(m: int) -> float:
    """kappa_m = pi^(m/2) / Gamma(m/2 + 1)."""
    return math.exp(0.5 * m * math.log(math.pi) - gammaln(0.5 * m + 1.0))


def radial_mass(a, b, lam: float, n: int):
    """int_a^b t^(n-1) (1 + lam t^2)^(-(n+1)/2) dt, elementwise.

    For n = 2 the closed form is rearranged to avoid cancellation when a ~ b.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if n == 2:
        A = 1.0 + lam * a * a
        B = 1.0 + lam * b * b
        sA, sB = np.sqrt(A), np.sqrt(B)
        return (b * b - a * a) / (sA * sB * (sA + sB))
    x, w = gauss_legendre(64)
    t = a[..., None] + (b - a)[..., None] * x
    f = t ** (n - 1) * (1.0 + lam * t * t) ** (-(n + 1) / 2)
    return (b - a) * (f @ w)


def safeguarded_newton(func, lo, hi, x0=None, xtol=1e-14, ftol=0.0, maxiter=200, xscale=1.0):
    """Vectorized Newton iteration kept inside a shrinking bracket.

    ``func(x)`` returns ``(f, df)`` elementwise; ``f(lo) <= 0 <= f(hi)`` is
    assumed (increasing orientation).  Steps leaving the bracket, or not
    halving the previous step, fall back to bisection.  Steps below ``xtol * max(xscale, |x|)`` count as converged.
    Returns ``(x, f(x), iterations)``.
    """
    lo = np.array(lo, dtype=float)
    hi = np.array(hi, dtype=float)
    x = 0.5 * (lo + hi) if x0 is None else np.clip(np.array(x0, dtype=float), lo, hi)
    f, df = func(x)
    dx_old = hi - lo
    for it in range(1, maxiter + 1):
        neg = f < 0
        lo = np.where(neg, x, lo)
        hi = np.where(neg, hi, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(f == 0, x, x - f / df)
        tol = xtol * np.maximum(xscale, np.abs(x))
        tiny = np.abs(step - x) <= tol
        # bisect when a step leaves the bracket or fails to halve the previous one
        slow = np.abs(step - x) > 0.5 * np.abs(dx_old)
        bad = ~np.isfinite(step) | (~tiny & ((step <= lo) | (step >= hi) | slow))
        small_f = np.abs(f) <= ftol
        x_new = np.where(small_f, x, np.where(bad, 0.5 * (lo + hi), step))
        done = small_f | (np.abs(x_new - x) <= tol) | (hi - lo <= tol)
        if np.all(done) and np.array_equal(x_new, x):
            return x, f, it
        dx_old = x_new - x
        x = x_new
        f, df = func(x)
        if np.all(done):
            return x, f, it
    raise RootFindingError(f"no convergence in {maxiter} iterations")
