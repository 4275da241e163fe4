"""Time mollification of step functions.

A mollifier eta_eps(s) = eta(s / eps) / eps is supported on [-eps, eps]
with unit mass.  Mollifying a step function f = sum_k 1_{E_k} v_k in
time only replaces each indicator by its mollified coefficient

    (1_{E_k})_eps(t) = integral eta_eps(s) 1_{E_k}(t - s) ds,

so f_eps(t) = sum_k c_k(t) v_k with c_k in [0, 1] summing to 1 at every
admissible t.  Coefficients reduce to the kernel's cumulative function:
an interval [a, b) contributes H(t - a) - H(t - b).  Evaluation requires
the window [t - eps, t + eps] to stay inside [0, tau); there is no
extension convention at the boundary.

Two kernels are provided: the triangular 'hat' (piecewise quadratic H,
closed form) and the smooth compactly supported 'bump'
eta(x) proportional to exp(-1 / (1 - x^2)), normalized numerically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import intervals as iv
from .graph import VertexFunction
from .parabolic import ParabolicStepFunction
from .quadrature import adaptive_simpson

HAT = "hat"
BUMP = "bump"
KINDS = (HAT, BUMP)

_BUMP_TABLE_M = 8192


def _bump_profile(u):
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    inside = np.abs(u) < 1.0
    ui = u[inside]
    out[inside] = np.exp(-1.0 / (1.0 - ui * ui))
    return out


@lru_cache(maxsize=1)
def _bump_table():
    """Normalized profile mass and cumulative table on [-1, 1].

    Composite Simpson on a uniform grid; the profile is smooth with all
    derivatives vanishing at the endpoints, so the table is accurate to
    well below 1e-10.
    """
    m = _BUMP_TABLE_M
    nodes = np.linspace(-1.0, 1.0, m + 1)
    mids = 0.5 * (nodes[:-1] + nodes[1:])
    h = 2.0 / m
    f_nodes = _bump_profile(nodes)
    f_mids = _bump_profile(mids)
    per_cell = h / 6.0 * (f_nodes[:-1] + 4.0 * f_mids + f_nodes[1:])
    cum = np.concatenate([[0.0], np.cumsum(per_cell)])
    total = float(cum[-1])
    return nodes, cum / total, total


def _bump_cdf(u):
    """Cumulative normalized bump profile, cubic interpolation of the table."""
    nodes, cdf, _ = _bump_table()
    u = np.asarray(u, dtype=float)
    res = np.empty_like(u)
    res[u <= -1.0] = 0.0
    res[u >= 1.0] = 1.0
    mid = (u > -1.0) & (u < 1.0)
    if np.any(mid):
        um = u[mid]
        h = nodes[1] - nodes[0]
        i = np.clip(((um - nodes[0]) / h).astype(int), 1, len(nodes) - 3)
        x = (um - nodes[i]) / h
        w_m1 = -x * (x - 1.0) * (x - 2.0) / 6.0
        w_0 = (x * x - 1.0) * (x - 2.0) / 2.0
        w_1 = -x * (x + 1.0) * (x - 2.0) / 2.0
        w_2 = x * (x * x - 1.0) / 6.0
        val = (
            w_m1 * cdf[i - 1] + w_0 * cdf[i] + w_1 * cdf[i + 1] + w_2 * cdf[i + 2]
        )
        res[mid] = np.clip(val, 0.0, 1.0)
    return res


@dataclass(frozen=True)
class Mollifier:
    """Symmetric unit-mass kernel of width eps, kind 'hat' or 'bump'."""

    kind: str
    eps: float

    def density(self, s):
        s = np.asarray(s, dtype=float)
        u = s / self.eps
        if self.kind == HAT:
            return np.maximum(1.0 - np.abs(u), 0.0) / self.eps
        _, _, total = _bump_table()
        return _bump_profile(u) / (self.eps * total)

    def cdf(self, y):
        """H(y) = integral of the kernel from -eps to y."""
        y = np.asarray(y, dtype=float)
        u = np.clip(y / self.eps, -1.0, 1.0)
        if self.kind == HAT:
            left = 0.5 * (u + 1.0) ** 2
            right = 1.0 - 0.5 * (1.0 - u) ** 2
            return np.where(u <= 0.0, left, right)
        return _bump_cdf(u)

    def mass(self, tol: float = 1e-12) -> float:
        """Numerical check of unit mass by adaptive quadrature."""
        return adaptive_simpson(
            lambda s: float(self.density(s)), -self.eps, self.eps, tol=tol
        )


def make_mollifier(kind: str, eps: float) -> Mollifier:
    if kind not in KINDS:
        raise ValueError(f"unknown mollifier kind {kind!r}; choose from {KINDS}")
    eps = float(eps)
    if not eps > 0:
        raise ValueError(f"mollifier width must be positive, got {eps}")
    return Mollifier(kind, eps)


def _check_window(t, eps: float, horizon: float):
    t = np.asarray(t, dtype=float)
    bad_low = t - eps < 0.0
    bad_high = t + eps > horizon
    if np.any(bad_low | bad_high):
        t_bad = float(np.asarray(t).flat[int(np.argmax(bad_low | bad_high))])
        raise ValueError(
            f"mollification window [{t_bad - eps}, {t_bad + eps}] leaves "
            f"[0, {horizon}); no boundary extension is defined"
        )


def mollify_indicator(E, m: Mollifier, t, horizon: float):
    """Mollified indicator (1_E)_eps(t) for an interval union E in [0, horizon).

    t may be a scalar or an array; every window [t - eps, t + eps] must
    stay inside [0, horizon).
    """
    E = iv.normalize(E)
    horizon = float(horizon)
    _check_window(t, m.eps, horizon)
    t = np.asarray(t, dtype=float)
    acc = np.zeros_like(t)
    for a, b in E:
        acc += m.cdf(t - a) - m.cdf(t - b)
    out = np.clip(acc, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MollifiedFunction:
    """Lazy representation of f_eps: the base step function plus the rule
    t -> coefficients (c_1(t), ..., c_N(t))."""

    base: ParabolicStepFunction
    mollifier: Mollifier

    @property
    def admissible_window(self) -> tuple[float, float]:
        return (self.mollifier.eps, self.base.tau - self.mollifier.eps)

    def coefficients(self, t) -> np.ndarray:
        """Array of mollified indicator coefficients, one per piece."""
        _check_window(t, self.mollifier.eps, self.base.tau)
        t_arr = np.asarray(t, dtype=float)
        out = np.empty(t_arr.shape + (len(self.base.values),))
        for k, piece in enumerate(self.base.partition.pieces):
            acc = np.zeros_like(t_arr)
            for a, b in piece:
                acc += self.mollifier.cdf(t_arr - a) - self.mollifier.cdf(t_arr - b)
            out[..., k] = np.clip(acc, 0.0, 1.0)
        return out

    def evaluate(self, t: float) -> VertexFunction:
        c = self.coefficients(float(t))
        vals = np.zeros(self.base.graph.n)
        for ck, v in zip(c, self.base.values):
            if ck != 0.0:
                vals += ck * v.values
        return VertexFunction(self.base.graph, vals)


def mollify(f: ParabolicStepFunction, m: Mollifier) -> MollifiedFunction:
    """Mollify a step function in time.  Admissible evaluation times are
    those with [t - eps, t + eps] inside [0, tau); a kernel wider than
    half the horizon leaves no admissible time and every evaluation fails
    the window check."""
    return MollifiedFunction(f, m)
