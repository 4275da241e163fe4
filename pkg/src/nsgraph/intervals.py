"""Finite unions of half-open intervals [a, b) on the real line.

A union is represented as a tuple of (a, b) pairs, sorted, pairwise
disjoint, with a < b.  All set operations are exact float arithmetic;
no tolerances are applied here.
"""

from __future__ import annotations

Interval = tuple[float, float]
IntervalUnion = tuple[Interval, ...]


def normalize(intervals) -> IntervalUnion:
    """Sort, drop empty intervals, and merge overlapping or adjacent ones."""
    cleaned = []
    for a, b in intervals:
        a = float(a)
        b = float(b)
        if not (a < b or a == b):
            raise ValueError(f"interval endpoints out of order: [{a}, {b})")
        if a < b:
            cleaned.append((a, b))
    cleaned.sort()
    merged: list[list[float]] = []
    for a, b in cleaned:
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return tuple((a, b) for a, b in merged)


def measure(u: IntervalUnion) -> float:
    return sum(b - a for a, b in u)


def shift(u: IntervalUnion, s: float) -> IntervalUnion:
    return tuple((a + s, b + s) for a, b in u)


def clip(u: IntervalUnion, lo: float, hi: float) -> IntervalUnion:
    """Intersect with [lo, hi)."""
    out = []
    for a, b in u:
        a2, b2 = max(a, lo), min(b, hi)
        if a2 < b2:
            out.append((a2, b2))
    return tuple(out)


def contains(u: IntervalUnion, t: float) -> bool:
    return any(a <= t < b for a, b in u)


def intersect(u1: IntervalUnion, u2: IntervalUnion) -> IntervalUnion:
    out = []
    for a, b in u1:
        for c, d in u2:
            lo, hi = max(a, c), min(b, d)
            if lo < hi:
                out.append((lo, hi))
    return normalize(out)


def union(u1: IntervalUnion, u2: IntervalUnion) -> IntervalUnion:
    return normalize(list(u1) + list(u2))


def difference(u1: IntervalUnion, u2: IntervalUnion) -> IntervalUnion:
    """Set difference u1 \\ u2."""
    out = []
    for a, b in u1:
        pieces = [(a, b)]
        for c, d in u2:
            next_pieces = []
            for p, q in pieces:
                # carve [c, d) out of [p, q)
                if d <= p or q <= c:
                    next_pieces.append((p, q))
                    continue
                if p < c:
                    next_pieces.append((p, c))
                if d < q:
                    next_pieces.append((d, q))
            pieces = next_pieces
        out.extend(pieces)
    return normalize(out)


def symmetric_difference(u1: IntervalUnion, u2: IntervalUnion) -> IntervalUnion:
    return union(difference(u1, u2), difference(u2, u1))


def endpoints(u: IntervalUnion) -> list[float]:
    pts = []
    for a, b in u:
        pts.append(a)
        pts.append(b)
    return pts
