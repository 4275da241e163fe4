"""Parabolic step functions on graph x time cylinders.

A step function takes finitely many vertex-function values, each on a
piece of a partition of the time interval [0, tau) into finite unions of
half-open intervals.  Time acts only through indicator coefficients, so
gradients, shifts, linear combinations, and product-space L^p norms are
all exact interval arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import intervals as iv
from .gradient import local_slope_gradient
from .graph import MetricGraph, VertexFunction

_SNAP = 1e-12


class TimePartition:
    """Disjoint pieces, each a finite union of [a, b) inside [0, tau).

    By default the pieces must tile [0, tau) exactly (tiny float gaps up
    to 1e-12 * max(1, tau) are snapped shut).  Partitions produced by
    time shifts may cover only part of the horizon; evaluation outside
    the covered set is an error, never an extension.
    """

    def __init__(self, tau: float, pieces, require_cover: bool = True):
        tau = float(tau)
        if not tau > 0:
            raise ValueError(f"horizon must be positive, got {tau}")
        normed = [iv.normalize(piece) for piece in pieces]
        if not normed:
            raise ValueError("partition needs at least one piece")
        flat = sorted(
            (a, b, k) for k, piece in enumerate(normed) for (a, b) in piece
        )
        for a, b, _ in flat:
            if a < 0 or b > tau + _SNAP * max(1.0, tau):
                raise ValueError(f"interval [{a}, {b}) leaves [0, {tau})")
        snap = _SNAP * max(1.0, tau)
        for (a1, b1, _), (a2, b2, _) in zip(flat, flat[1:]):
            if a2 < b1 - snap:
                raise ValueError(f"pieces overlap near t = {a2}")
        if require_cover:
            if not flat:
                raise ValueError("pieces cover nothing")
            gaps = []
            if abs(flat[0][0]) > snap:
                raise ValueError("pieces do not cover t = 0")
            if abs(flat[-1][1] - tau) > snap:
                raise ValueError(f"pieces do not cover up to t = {tau}")
            for (a1, b1, _), (a2, b2, _) in zip(flat, flat[1:]):
                if a2 > b1 + snap:
                    gaps.append((b1, a2))
            if gaps:
                raise ValueError(f"pieces leave gaps: {gaps}")
            # snap endpoints so the tiling is exact float arithmetic
            snapped = [list(t) for t in flat]
            snapped[0][0] = 0.0
            snapped[-1][1] = tau
            for prev, cur in zip(snapped, snapped[1:]):
                cur[0] = prev[1]
            rebuilt: list[list[tuple[float, float]]] = [[] for _ in normed]
            for a, b, k in snapped:
                rebuilt[k].append((a, b))
            normed = [iv.normalize(piece) for piece in rebuilt]

        self.tau = tau
        self.pieces: tuple[iv.IntervalUnion, ...] = tuple(normed)
        self.full_cover = bool(require_cover)

    @cached_property
    def _cells(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted cell boundaries and the piece index of each cell (-1 uncovered)."""
        pts = {0.0, self.tau}
        for piece in self.pieces:
            pts.update(iv.endpoints(piece))
        bounds = np.asarray(sorted(pts))
        owner = np.full(len(bounds) - 1, -1, dtype=int)
        for k, piece in enumerate(self.pieces):
            for a, b in piece:
                lo = int(np.searchsorted(bounds, a))
                hi = int(np.searchsorted(bounds, b))
                owner[lo:hi] = k
        return bounds, owner

    def piece_of(self, t: float) -> int:
        """Index of the piece containing t; raises outside [0, tau) or off cover."""
        t = float(t)
        if not (0.0 <= t < self.tau):
            raise ValueError(f"time {t} outside the horizon [0, {self.tau})")
        bounds, owner = self._cells
        cell = int(np.searchsorted(bounds, t, side="right")) - 1
        k = int(owner[min(max(cell, 0), len(owner) - 1)])
        if k < 0:
            raise ValueError(f"time {t} lies in a strip not covered by any piece")
        return k

    def covered(self) -> iv.IntervalUnion:
        return iv.normalize([itv for piece in self.pieces for itv in piece])

    def uncovered_measure_in(self, t0: float, t1: float) -> float:
        return (t1 - t0) - iv.measure(iv.clip(self.covered(), t0, t1))

    def piece_measure(self, k: int) -> float:
        return iv.measure(self.pieces[k])

    def overlap(self, k: int, t0: float, t1: float) -> float:
        return iv.measure(iv.clip(self.pieces[k], t0, t1))

    def boundaries(self) -> list[float]:
        pts = {0.0, self.tau}
        for piece in self.pieces:
            pts.update(iv.endpoints(piece))
        return sorted(pts)

    def shifted(self, s: float) -> "TimePartition":
        """Translate every piece by s and clip to [0, tau); cover shrinks."""
        moved = [iv.clip(iv.shift(piece, s), 0.0, self.tau) for piece in self.pieces]
        return TimePartition(self.tau, moved, require_cover=False)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TimePartition):
            return NotImplemented
        return self.tau == other.tau and self.pieces == other.pieces

    def __hash__(self) -> int:
        return hash((self.tau, self.pieces))

    def __repr__(self) -> str:
        return f"TimePartition(tau={self.tau}, pieces={len(self.pieces)})"


def contiguous_partition(tau: float, breakpoints) -> TimePartition:
    """Partition of [0, tau) into consecutive intervals at the given cut times."""
    cuts = [0.0] + sorted(float(b) for b in breakpoints) + [float(tau)]
    return TimePartition(tau, [[(a, b)] for a, b in zip(cuts, cuts[1:])])


@dataclass(frozen=True, eq=False)
class ParabolicStepFunction:
    """f(t) = sum_k 1_{E_k}(t) v_k with vertex functions v_k."""

    graph: MetricGraph
    partition: TimePartition
    values: tuple[VertexFunction, ...]

    def __post_init__(self):
        if len(self.values) != len(self.partition.pieces):
            raise ValueError(
                f"{len(self.partition.pieces)} pieces but {len(self.values)} values"
            )
        for v in self.values:
            if v.graph != self.graph:
                raise ValueError("piece value lives on a different graph")
        object.__setattr__(self, "values", tuple(self.values))

    @property
    def tau(self) -> float:
        return self.partition.tau

    def evaluate(self, t: float) -> VertexFunction:
        return self.values[self.partition.piece_of(t)]

    def __eq__(self, other) -> bool:
        if not isinstance(other, ParabolicStepFunction):
            return NotImplemented
        return (
            self.graph == other.graph
            and self.partition == other.partition
            and all(a == b for a, b in zip(self.values, other.values))
        )

    def __repr__(self) -> str:
        return (
            f"ParabolicStepFunction(n={self.graph.n}, "
            f"pieces={len(self.values)}, tau={self.tau})"
        )


def parabolic_gradient(f: ParabolicStepFunction) -> ParabolicStepFunction:
    """Slice-wise upper gradient: the time variable acts as a scalar, so
    the gradient of a step function is the step function of gradients."""
    grads = tuple(local_slope_gradient(f.graph, v) for v in f.values)
    return ParabolicStepFunction(f.graph, f.partition, grads)


def time_shift(f: ParabolicStepFunction, s: float) -> ParabolicStepFunction:
    """Represents t -> f(t - s); pieces translate by s and are clipped to
    the horizon.  The vacated strip is uncovered and errors on evaluation."""
    return ParabolicStepFunction(f.graph, f.partition.shifted(float(s)), f.values)


def combine(
    f: ParabolicStepFunction,
    h: ParabolicStepFunction,
    alpha: float,
    beta: float,
) -> ParabolicStepFunction:
    """alpha * f + beta * h on the common refinement of the two partitions.

    Defined where both are covered; cells with the same piece pair are
    regrouped, so the result has at most len(f) * len(h) pieces.
    """
    if f.graph != h.graph:
        raise ValueError("cannot combine step functions on different graphs")
    if f.tau != h.tau:
        raise ValueError(f"horizons differ: {f.tau} vs {h.tau}")
    bf, of = f.partition._cells
    bh, oh = h.partition._cells
    bounds = np.unique(np.concatenate([bf, bh]))
    groups: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for a, b in zip(bounds[:-1], bounds[1:]):
        mid = 0.5 * (a + b)
        kf = of[int(np.searchsorted(bf, mid, side="right")) - 1]
        kh = oh[int(np.searchsorted(bh, mid, side="right")) - 1]
        if kf < 0 or kh < 0:
            continue
        groups.setdefault((int(kf), int(kh)), []).append((float(a), float(b)))
    if not groups:
        raise ValueError("the two step functions have no common covered time")
    keys = sorted(groups)
    pieces = [groups[key] for key in keys]
    vals = tuple(
        float(alpha) * f.values[kf] + float(beta) * h.values[kh] for kf, kh in keys
    )
    part = TimePartition(f.tau, pieces, require_cover=False)
    return ParabolicStepFunction(f.graph, part, vals)


@dataclass(frozen=True)
class Subcylinder:
    """Vertex subset x closed time window [t0, t1], compactly inside (0, tau)."""

    vertices: tuple[str, ...]
    t0: float
    t1: float

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        if not self.vertices:
            raise ValueError("subcylinder needs a nonempty vertex set")
        if not (0.0 < self.t0 < self.t1):
            raise ValueError(f"need 0 < t0 < t1, got [{self.t0}, {self.t1}]")

    @classmethod
    def full(cls, g: MetricGraph, t0: float, t1: float) -> "Subcylinder":
        return cls(tuple(g.ids), float(t0), float(t1))

    def validate_against(self, g: MetricGraph, tau: float):
        for v in self.vertices:
            if v not in g.index:
                raise ValueError(f"subcylinder vertex {v!r} not in the graph")
        if not self.t1 < tau:
            raise ValueError(
                f"window [{self.t0}, {self.t1}] is not compactly inside (0, {tau})"
            )

    def time_distance_to_boundary(self, tau: float) -> float:
        return min(self.t0, tau - self.t1)


def product_lp_norm(f: ParabolicStepFunction, K: Subcylinder, p: float) -> float:
    """Exact L^p norm over the subcylinder:
    ( sum_k |E_k cap I| sum_{x in U} mu(x) |v_k(x)|^p )^(1/p)."""
    if not p >= 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    K.validate_against(f.graph, f.tau)
    if f.partition.uncovered_measure_in(K.t0, K.t1) > 0:
        raise ValueError(
            "subcylinder window meets time not covered by the step function"
        )
    sel = np.asarray([f.graph.index[v] for v in K.vertices], dtype=int)
    w = f.graph.mass[sel]
    total = 0.0
    for k, v in enumerate(f.values):
        dt = f.partition.overlap(k, K.t0, K.t1)
        if dt > 0:
            total += dt * float(np.sum(w * np.abs(v.values[sel]) ** p))
    return total ** (1.0 / p)
