"""Small quadrature toolbox: adaptive Simpson, adaptive Gauss-Legendre,
and exact integrals of |quadratic|^p for integer p."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as npoly


class QuadratureError(RuntimeError):
    pass


def adaptive_simpson(fn, a: float, b: float, tol: float = 1e-10, max_subdivisions: int = 10_000) -> float:
    """Adaptive Simpson with Richardson correction.

    `tol` is an absolute tolerance on the whole interval; the subdivision
    budget guards against non-integrable behavior.
    """
    a, b = float(a), float(b)
    if b <= a:
        return 0.0
    count = 0

    def simpson(x0, x2, f0, f1, f2):
        return (x2 - x0) / 6.0 * (f0 + 4.0 * f1 + f2)

    def recurse(x0, x2, f0, f1, f2, whole, tol_here, depth):
        nonlocal count
        count += 1
        if count > max_subdivisions:
            raise QuadratureError(
                f"adaptive Simpson exceeded {max_subdivisions} subdivisions"
            )
        xm = 0.5 * (x0 + x2)
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl, fr = fn(xl), fn(xr)
        left = simpson(x0, xm, f0, fl, f1)
        right = simpson(xm, x2, f1, fr, f2)
        if depth > 0 and abs(left + right - whole) <= 15.0 * tol_here:
            return left + right + (left + right - whole) / 15.0
        return recurse(x0, xm, f0, fl, f1, left, tol_here / 2.0, depth + 1) + recurse(
            xm, x2, f1, fr, f2, right, tol_here / 2.0, depth + 1
        )

    f0, f1, f2 = fn(a), fn(0.5 * (a + b)), fn(b)
    return recurse(a, b, f0, f1, f2, simpson(a, b, f0, f1, f2), tol, 0)


@lru_cache(maxsize=8)
def _gl_nodes(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def _gl_apply(fn_vec, a, b, order):
    x, w = _gl_nodes(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    return half * float(w @ fn_vec(mid + half * x))


def adaptive_gauss(fn_vec, a: float, b: float, tol: float = 1e-12, max_depth: int = 48) -> float:
    """Adaptive Gauss-Legendre (10 vs 20 point comparison) for a function
    that accepts a node array.  Absolute tolerance over the interval."""

    def recurse(lo, hi, tol_here, depth):
        coarse = _gl_apply(fn_vec, lo, hi, 10)
        fine = _gl_apply(fn_vec, lo, hi, 20)
        if abs(fine - coarse) <= tol_here or depth >= max_depth:
            return fine
        mid = 0.5 * (lo + hi)
        return recurse(lo, mid, tol_here / 2.0, depth + 1) + recurse(
            mid, hi, tol_here / 2.0, depth + 1
        )

    if b <= a:
        return 0.0
    return recurse(float(a), float(b), tol, 0)


def poly_roots_in(coeffs, a: float, b: float) -> list[float]:
    """Real roots of the polynomial (coefficients in increasing order)
    strictly inside (a, b)."""
    c = np.asarray(coeffs, dtype=float)
    scale = float(np.max(np.abs(c), initial=0.0))
    if scale == 0.0:
        return []
    trimmed = npoly.polytrim(c, tol=0.0)
    if len(trimmed) <= 1:
        return []
    roots = npoly.polyroots(trimmed)
    out = []
    for r in roots:
        if abs(r.imag) <= 1e-10 * max(1.0, abs(r.real)):
            x = float(r.real)
            if a < x < b:
                out.append(x)
    out.sort()
    merged = []
    for x in out:
        if not merged or x - merged[-1] > 1e-15 * max(1.0, abs(x)):
            merged.append(x)
    return merged


def integral_abs_poly_pow(coeffs, a: float, b: float, p: float, tol: float = 1e-12) -> float:
    """Integral of |q(t)|^p over [a, b] for a low-degree polynomial q.

    Splits at the real roots so the integrand is sign-constant on each
    segment; integer p is handled exactly through the antiderivative of
    q^p, everything else by adaptive Gauss-Legendre.
    """
    a, b = float(a), float(b)
    if b <= a:
        return 0.0
    c = np.asarray(coeffs, dtype=float)
    if not np.any(c):
        return 0.0
    cuts = [a] + poly_roots_in(c, a, b) + [b]
    p_int = int(round(p))
    exact = abs(p - p_int) < 1e-14 and p_int >= 1
    total = 0.0
    if exact:
        antider = npoly.polyint(npoly.polypow(c, p_int))
        for lo, hi in zip(cuts[:-1], cuts[1:]):
            total += abs(npoly.polyval(hi, antider) - npoly.polyval(lo, antider))
        return float(total)
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        sign = 1.0 if npoly.polyval(0.5 * (lo + hi), c) >= 0 else -1.0

        def f(ts):
            return np.maximum(sign * npoly.polyval(ts, c), 0.0) ** p

        total += adaptive_gauss(f, lo, hi, tol=tol)
    return float(total)
