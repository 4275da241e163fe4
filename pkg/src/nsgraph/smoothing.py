"""Verification harness for time-smoothing of parabolic step functions.

The object under test: for a step function f on [0, tau) x graph and its
time mollification f_eps, the L^p norm over a compact subcylinder K of
the upper gradient of (f - f_eps)(t) must vanish as eps -> 0, and the
shifted differences f(. - s) - f(.) obey the domination

    || g_{f(.-s) - f(.)} ||_{L^p(K)}
        <= sum_k || 1_{E_k}(. - s) - 1_{E_k}(.) ||_{L^p(I)} * || g_{v_k} ||_{L^p(U)}.

Both sides are exact for step data.  For the hat kernel the mollified
coefficients are piecewise quadratic in t with knots at the piece
endpoints shifted by -eps, 0, +eps, so the sweep norms are computed in
closed form per cell: cells where exactly two coefficient polynomials
survive (the generic case, an isolated jump) factor into a scalar
integral times a precomputed gradient norm; the remaining cells fall
back to per-vertex root isolation of the competing edge quadratics.
Integer p integrates exactly, other p by adaptive Gauss-Legendre; the
bump kernel uses adaptive Simpson on the pointwise integrand.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import intervals as iv
from .gradient import local_slope_gradient
from .graph import VertexFunction, lp_norm
from .mollify import HAT, MollifiedFunction, Mollifier, make_mollifier
from .parabolic import (
    ParabolicStepFunction,
    Subcylinder,
    combine,
    parabolic_gradient,
    product_lp_norm,
    time_shift,
)
from .quadrature import adaptive_simpson, integral_abs_poly_pow, poly_roots_in

_COEFF_FLOOR = 1e-14


def geometric_schedule(start: float, factor: float = 0.5, steps: int = 13) -> np.ndarray:
    """start * factor^j for j = 0 .. steps-1."""
    if not start > 0:
        raise ValueError(f"schedule start must be positive, got {start}")
    if not 0.0 < factor < 1.0:
        raise ValueError(f"schedule factor must lie in (0, 1), got {factor}")
    if steps < 1:
        raise ValueError("schedule needs at least one step")
    return start * factor ** np.arange(steps)


@dataclass
class ConvergenceReport:
    """Outcome of a sweep: schedule, norms, fitted rate, pass flags.

    In shift mode `norms` holds the base-window values and `sup_norms`
    the sup over window translates; decay and rate are judged on the sup
    series.  The decay flag asks the monotone envelope to fall below
    rtol times the initial value; the rate flag compares the log-log
    slope over the last `rate_points` schedule entries to the target
    1 / p with slack `rate_slack`.
    """

    mode: str
    params: np.ndarray
    norms: np.ndarray
    sup_norms: np.ndarray | None
    rate: float
    rate_target: float
    decay_ok: bool
    rate_ok: bool
    rtol: float
    rate_points: int
    rate_slack: float

    @property
    def envelope(self) -> np.ndarray:
        return np.minimum.accumulate(self._judged())

    def _judged(self) -> np.ndarray:
        return self.sup_norms if self.sup_norms is not None else self.norms

    @property
    def passed(self) -> bool:
        return self.decay_ok

    def summary(self) -> str:
        series = self._judged()
        first = series[0]
        last = self.envelope[-1]
        return (
            f"{self.mode} sweep: {len(self.params)} steps, "
            f"norm {first:.6g} -> {last:.6g}, rate {self.rate:.4f} "
            f"(target {self.rate_target:.4f}), "
            f"decay {'ok' if self.decay_ok else 'FAILED'}, "
            f"rate {'ok' if self.rate_ok else 'FAILED'}"
        )

    def to_csv(self, target) -> None:
        """Write `param, norm[, sup_norm], rate_running` rows (RFC 4180 style)."""

        def fmt(x) -> str:
            return "" if x is None or (isinstance(x, float) and math.isnan(x)) else format(x, ".17g")

        close = False
        if isinstance(target, (str, bytes)):
            fh = open(target, "w", newline="")
            close = True
        else:
            fh = target
        try:
            writer = csv.writer(fh)
            if self.mode == "shift":
                writer.writerow(["param", "norm", "sup_norm", "rate_running"])
            else:
                writer.writerow(["param", "norm", "rate_running"])
            running = _running_rates(self.params, self._judged(), self.rate_points)
            for idx in range(len(self.params)):
                row = [fmt(float(self.params[idx])), fmt(float(self.norms[idx]))]
                if self.mode == "shift":
                    row.append(fmt(float(self.sup_norms[idx])))
                row.append(fmt(running[idx]))
                writer.writerow(row)
        finally:
            if close:
                fh.close()


def fit_rate(params, norms, points: int) -> float:
    """Log-log least squares slope over the trailing `points` entries;
    nan when fewer than two positive norms are available."""
    params = np.asarray(params, dtype=float)
    norms = np.asarray(norms, dtype=float)
    tail = slice(max(0, len(params) - points), None)
    x = params[tail]
    y = norms[tail]
    keep = y > 0
    if keep.sum() < 2:
        return math.nan
    slope = np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0]
    return float(slope)


def _running_rates(params, norms, points: int) -> list[float]:
    return [
        fit_rate(params[: idx + 1], norms[: idx + 1], points)
        for idx in range(len(params))
    ]


@dataclass(frozen=True)
class DifferenceGradient:
    """Pointwise-in-time gradient data for f - f_eps at a fixed t."""

    gradient: VertexFunction   # upper gradient of (f - f_eps)(t)
    bound: VertexFunction      # sum_k |1_{E_k}(t) - c_k(t)| g_{v_k}
    weights: np.ndarray        # the coefficients 1_{E_k}(t) - c_k(t)


def gradient_of_difference(f: ParabolicStepFunction, m: Mollifier, t: float) -> DifferenceGradient:
    """Gradient of (f - f_eps)(t) together with the sub-linearity bound.

    Sub-linearity and exact scalar homogeneity of the local slope give
    g_{(f - f_eps)(t)} <= sum_k |1_{E_k}(t) - c_k(t)| g_{v_k} pointwise;
    both sides are returned.
    """
    k0 = f.partition.piece_of(float(t))
    c = MollifiedFunction(f, m).coefficients(float(t))
    w = -c
    w[k0] += 1.0
    diff_vals = np.zeros(f.graph.n)
    bound_vals = np.zeros(f.graph.n)
    for wk, v in zip(w, f.values):
        if wk != 0.0:
            diff_vals += wk * v.values
            bound_vals += abs(wk) * local_slope_gradient(f.graph, v).values
    return DifferenceGradient(
        gradient=local_slope_gradient(f.graph, VertexFunction(f.graph, diff_vals)),
        bound=VertexFunction(f.graph, bound_vals),
        weights=w,
    )


# ---------------------------------------------------------------------------
# sweep norm engine


def _hat_cdf_poly(a: float, eps: float, mid: float) -> np.ndarray:
    """Coefficients (c0, c1, c2) of H(t - a) as a quadratic in the local
    coordinate theta = t - mid, H being the hat kernel cumulative
    function.  Local coordinates keep every coefficient's contribution
    O(1) on the cell; a global monomial expansion would cancel
    catastrophically at small eps."""
    y0 = mid - a
    if y0 <= -eps:
        return np.zeros(3)
    if y0 >= eps:
        return np.array([1.0, 0.0, 0.0])
    A = 0.5 / (eps * eps)
    if y0 < 0.0:
        d = y0 + eps  # in (0, eps): H = A (theta + d)^2
        return np.array([A * d * d, 2.0 * A * d, A])
    d = eps - y0      # in (0, eps): H = 1 - A (d - theta)^2
    return np.array([1.0 - A * d * d, 2.0 * A * d, -A])


def _cell_knots(f: ParabolicStepFunction, eps: float, t0: float, t1: float) -> np.ndarray:
    pts = {t0, t1}
    for b in f.partition.boundaries():
        for x in (b - eps, b, b + eps):
            if t0 < x < t1:
                pts.add(x)
    return np.asarray(sorted(pts))


class _PairEnergies:
    """Cache of sum_{x in U} mu(x) g_{v_i - v_j}(x)^p over piece pairs."""

    def __init__(self, f: ParabolicStepFunction, U_idx: np.ndarray, p: float):
        self.g = f.graph
        self.V = np.stack([v.values for v in f.values])
        self.U_idx = U_idx
        self.w = self.g.mass[U_idx]
        self.p = p
        self._cache: dict[tuple[int, int], float] = {}

    def __call__(self, i: int, j: int) -> float:
        key = (min(i, j), max(i, j))
        if key not in self._cache:
            diff = self.V[key[0]] - self.V[key[1]]
            grad = np.zeros(self.g.n)
            if self.g.num_edges:
                ei = self.g.edge_index[:, 0]
                ej = self.g.edge_index[:, 1]
                slopes = np.abs(diff[ei] - diff[ej]) / self.g.edge_length
                np.maximum.at(grad, ei, slopes)
                np.maximum.at(grad, ej, slopes)
            self._cache[key] = float(np.sum(self.w * grad[self.U_idx] ** self.p))
        return self._cache[key]


def _difference_energy_hat(f: ParabolicStepFunction, eps: float, p: float, K: Subcylinder) -> float:
    """Exact integral over K of sum_x mu(x) g_{(f - f_eps)(t)}(x)^p dt."""
    g = f.graph
    U_idx = np.asarray([g.index[v] for v in K.vertices], dtype=int)
    pairs = _PairEnergies(f, U_idx, p)
    V = pairs.V
    knots = _cell_knots(f, eps, K.t0, K.t1)
    n_pieces = len(f.values)

    incident: list[list[int]] = [[] for _ in range(g.n)]
    for e, (i, j) in enumerate(g.edge_index):
        incident[i].append(e)
        incident[j].append(e)

    energy = 0.0
    for ca, cb in zip(knots[:-1], knots[1:]):
        if cb <= ca:
            continue
        mid = 0.5 * (ca + cb)
        half = 0.5 * (cb - ca)  # cell is theta in [-half, half]
        k0 = f.partition.piece_of(mid)
        polys = np.zeros((n_pieces, 3))
        for k, piece in enumerate(f.partition.pieces):
            acc = np.zeros(3)
            for a, b in piece:
                acc += _hat_cdf_poly(a, eps, mid) - _hat_cdf_poly(b, eps, mid)
            polys[k] = -acc
        polys[k0, 0] += 1.0

        scale = np.abs(polys).max(axis=1)
        floor = _COEFF_FLOOR * max(1.0, float(scale.max()))
        active = np.flatnonzero(scale > floor)
        if len(active) == 0:
            continue
        if len(active) == 2:
            i, j = active
            # with two survivors the coefficients cancel exactly (both the
            # indicators and the mollified coefficients sum to 1), so the
            # difference is rank one: d(t) = w_j(t) (v_j - v_i)
            cancel = np.abs(polys[i] + polys[j]).max()
            if cancel <= 1e-9 * max(scale[i], scale[j]):
                pair_e = pairs(int(i), int(j))
                if pair_e > 0:
                    energy += pair_e * integral_abs_poly_pow(polys[j], -half, half, p)
                continue

        # general cell: per-vertex max over incident edge quadratics
        W = polys[active]
        diffs = V[active][:, g.edge_index[:, 0]] - V[active][:, g.edge_index[:, 1]]
        edge_polys = (diffs / g.edge_length).T @ W  # (num_edges, 3)
        for x in U_idx:
            cand = [edge_polys[e] for e in incident[x]]
            cand = [c for c in cand if np.abs(c).max() > floor]
            if not cand:
                continue
            cuts = {-half, half}
            for ci in range(len(cand)):
                cuts.update(poly_roots_in(cand[ci], -half, half))
                for cj in range(ci + 1, len(cand)):
                    cuts.update(poly_roots_in(cand[ci] - cand[cj], -half, half))
                    cuts.update(poly_roots_in(cand[ci] + cand[cj], -half, half))
            pts = sorted(cuts)
            contrib = 0.0
            for sa, sb in zip(pts[:-1], pts[1:]):
                if sb <= sa:
                    continue
                sm = 0.5 * (sa + sb)
                vals = [abs(c[0] + sm * (c[1] + sm * c[2])) for c in cand]
                winner = cand[int(np.argmax(vals))]
                contrib += integral_abs_poly_pow(winner, sa, sb, p)
            energy += float(g.mass[x]) * contrib
    return energy


def _difference_energy_pointwise(f: ParabolicStepFunction, m: Mollifier, p: float, K: Subcylinder) -> float:
    """Adaptive quadrature fallback used for non-polynomial kernels."""
    g = f.graph
    U_idx = np.asarray([g.index[v] for v in K.vertices], dtype=int)
    V = np.stack([v.values for v in f.values])
    wU = g.mass[U_idx]
    ei = g.edge_index[:, 0]
    ej = g.edge_index[:, 1]

    def h(t: float) -> float:
        k0 = f.partition.piece_of(t)
        w = np.zeros(len(V))
        for k, piece in enumerate(f.partition.pieces):
            acc = 0.0
            for a, b in piece:
                acc += float(m.cdf(t - a) - m.cdf(t - b))
            w[k] = -acc
        w[k0] += 1.0
        d = w @ V
        grad = np.zeros(g.n)
        if g.num_edges:
            slopes = np.abs(d[ei] - d[ej]) / g.edge_length
            np.maximum.at(grad, ei, slopes)
            np.maximum.at(grad, ej, slopes)
        return float(np.sum(wU * grad[U_idx] ** p))

    knots = _cell_knots(f, m.eps, K.t0, K.t1)
    total = 0.0
    for ca, cb in zip(knots[:-1], knots[1:]):
        if cb > ca:
            total += adaptive_simpson(h, ca, cb, tol=1e-12)
    return total


def difference_gradient_norm(f: ParabolicStepFunction, m: Mollifier, p: float, K: Subcylinder) -> float:
    """|| g_{(f - f_eps)(.)} ||_{L^p(K)}."""
    if not p >= 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    K.validate_against(f.graph, f.tau)
    if not m.eps < K.time_distance_to_boundary(f.tau):
        raise ValueError(
            f"kernel width {m.eps} reaches the horizon boundary from the window "
            f"[{K.t0}, {K.t1}]"
        )
    if m.kind == HAT:
        energy = _difference_energy_hat(f, m.eps, p, K)
    else:
        energy = _difference_energy_pointwise(f, m, p, K)
    return energy ** (1.0 / p)


# ---------------------------------------------------------------------------
# sweeps


def _validate_schedule(schedule, dist: float, what: str) -> np.ndarray:
    s = np.asarray(schedule, dtype=float)
    if s.ndim != 1 or len(s) < 1:
        raise ValueError("schedule must be a nonempty 1-d sequence")
    if np.any(s <= 0):
        raise ValueError("schedule values must be positive")
    if np.any(np.diff(s) >= 0):
        raise ValueError("schedule must be strictly decreasing")
    if not s[0] < dist:
        raise ValueError(
            f"largest {what} {s[0]} must stay below the window's distance "
            f"{dist} to the horizon boundary"
        )
    return s


def epsilon_sweep(
    f: ParabolicStepFunction,
    p: float,
    K: Subcylinder,
    schedule=None,
    kernel: str = HAT,
    rtol: float = 1e-3,
    rate_points: int = 6,
    rate_slack: float = 0.15,
) -> ConvergenceReport:
    """Norms of g_{f - f_eps} over K along a decreasing eps schedule.

    Defaults: geometric schedule eps_j = eps0 / 2^j for j = 0..12 with
    eps0 half the window's distance to the horizon boundary.
    """
    K.validate_against(f.graph, f.tau)
    dist = K.time_distance_to_boundary(f.tau)
    if schedule is None:
        schedule = geometric_schedule(dist / 2.0)
    eps_values = _validate_schedule(schedule, dist, "kernel width")
    norms = np.array(
        [
            difference_gradient_norm(f, make_mollifier(kernel, float(e)), p, K)
            for e in eps_values
        ]
    )
    return _build_report("epsilon", eps_values, norms, None, p, rtol, rate_points, rate_slack)


def shift_difference_norm(f: ParabolicStepFunction, s: float, p: float, K: Subcylinder) -> float:
    """|| g_{f(. - s) - f(.)} ||_{L^p(K)}, exact step arithmetic."""
    if s == 0.0:
        return 0.0
    diff = combine(time_shift(f, s), f, 1.0, -1.0)
    return product_lp_norm(parabolic_gradient(diff), K, p)


def shift_sweep(
    f: ParabolicStepFunction,
    p: float,
    K: Subcylinder,
    schedule=None,
    offsets: int = 11,
    rtol: float = 1e-3,
    rate_points: int = 6,
    rate_slack: float = 0.15,
) -> ConvergenceReport:
    """Shifted-difference norms M(s) along a decreasing schedule of s.

    Uniformity in t is probed by translating the time window: for each s
    the reported sup_norm is the maximum of M(s) over `offsets` window
    translates K + delta that stay compactly inside the horizon; decay
    and rate are judged on that sup series.
    """
    K.validate_against(f.graph, f.tau)
    dist = K.time_distance_to_boundary(f.tau)
    if schedule is None:
        schedule = geometric_schedule(dist / 2.0)
    s_values = _validate_schedule(schedule, dist, "time shift")
    margin = 1e-9 * f.tau
    norms = []
    sups = []
    for s in s_values:
        base = shift_difference_norm(f, float(s), p, K)
        lo = -K.t0 + s + margin
        hi = f.tau - K.t1 - s - margin
        deltas = {0.0}
        if hi > lo:
            deltas.update(np.linspace(lo, hi, offsets).tolist())
        best = 0.0
        for d in sorted(deltas):
            Kd = Subcylinder(K.vertices, K.t0 + d, K.t1 + d)
            best = max(best, shift_difference_norm(f, float(s), p, Kd))
        norms.append(base)
        sups.append(best)
    return _build_report(
        "shift", s_values, np.asarray(norms), np.asarray(sups), p, rtol, rate_points, rate_slack
    )


def _build_report(mode, params, norms, sup_norms, p, rtol, rate_points, rate_slack) -> ConvergenceReport:
    judged = sup_norms if sup_norms is not None else norms
    rate = fit_rate(params, judged, rate_points)
    envelope_final = float(np.minimum.accumulate(judged)[-1])
    decay_ok = judged[0] == 0.0 or envelope_final <= rtol * float(judged[0])
    target = 1.0 / p
    if math.isnan(rate):
        rate_ok = bool(np.all(judged == 0.0))
    else:
        rate_ok = abs(rate - target) <= rate_slack
    return ConvergenceReport(
        mode=mode,
        params=params,
        norms=norms,
        sup_norms=sup_norms,
        rate=rate,
        rate_target=target,
        decay_ok=bool(decay_ok),
        rate_ok=bool(rate_ok),
        rtol=rtol,
        rate_points=rate_points,
        rate_slack=rate_slack,
    )


# ---------------------------------------------------------------------------
# proof-chain domination


@dataclass(frozen=True)
class ProofBoundCheck:
    lhs: float
    rhs: float
    ok: bool


def verify_proof_bound(f: ParabolicStepFunction, s: float, p: float, K: Subcylinder) -> ProofBoundCheck:
    """Check the Minkowski / Fubini domination of the shifted difference:

        lhs = || g_{f(. - s) - f(.)} ||_{L^p(K)}
        rhs = sum_k |(E_k + s) symdiff E_k cap I|^(1/p) * || g_{v_k} ||_{L^p(U)}

    Equality holds exactly when no two indicator differences overlap in
    time; otherwise lhs < rhs is typical.  ok uses slack 1e-9 * (1 + rhs).
    """
    K.validate_against(f.graph, f.tau)
    if not abs(s) < K.time_distance_to_boundary(f.tau):
        raise ValueError("shift magnitude must stay below the window's boundary distance")
    lhs = shift_difference_norm(f, s, p, K)
    window = ((K.t0, K.t1),)
    rhs = 0.0
    for piece, v in zip(f.partition.pieces, f.values):
        moved = iv.shift(piece, s)
        overlap = iv.measure(iv.intersect(iv.symmetric_difference(moved, piece), window))
        if overlap > 0:
            grad = local_slope_gradient(f.graph, v)
            rhs += overlap ** (1.0 / p) * lp_norm(f.graph, grad, p, K.vertices)
    return ProofBoundCheck(lhs=lhs, rhs=rhs, ok=lhs <= rhs + 1e-9 * (1.0 + rhs))
