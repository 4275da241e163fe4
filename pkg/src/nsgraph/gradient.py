"""Upper gradients of vertex functions.

The canonical discrete upper gradient is the local slope
    g_f(x) = max_{y ~ x} |f(x) - f(y)| / length(xy),
which satisfies the upper gradient inequality along every curve for the
trapezoid line integral, exact absolute homogeneity, sub-linearity, and
locality on closed neighborhoods.  For p > 1 an L^p-smallest upper
gradient subject to the per-edge trapezoid inequality is available as a
comparison point; it can undercut the local slope in norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import CurveFamily, MetricGraph, VertexFunction, line_integral, lp_norm
from .solver import minimize_power_objective


def local_slope_gradient(g: MetricGraph, f: VertexFunction) -> VertexFunction:
    """Largest neighbor difference quotient at each vertex."""
    if f.graph != g:
        raise ValueError("function does not live on this graph")
    out = np.zeros(g.n)
    if g.num_edges:
        i = g.edge_index[:, 0]
        j = g.edge_index[:, 1]
        slopes = np.abs(f.values[i] - f.values[j]) / g.edge_length
        np.maximum.at(out, i, slopes)
        np.maximum.at(out, j, slopes)
    return VertexFunction(g, out)


def verify_upper_gradient(
    g: MetricGraph,
    f: VertexFunction,
    h: VertexFunction,
    family: CurveFamily,
    tol: float = 1e-12,
) -> bool:
    """Check |f(end) - f(start)| <= int_curve h ds for every curve.

    h must be nonnegative; the inequality is tested with absolute slack
    `tol` per curve.
    """
    if np.any(h.values < 0):
        raise ValueError("candidate upper gradient has negative values")
    for curve in family:
        df = abs(f(curve.vertices[-1]) - f(curve.vertices[0]))
        if df > line_integral(g, h, curve) + tol:
            return False
    return True


def lp_minimal_gradient(g: MetricGraph, f: VertexFunction, p: float, **solver_kwargs) -> VertexFunction:
    """L^p(mu)-smallest nonnegative h with (h(u)+h(v))/2 * l(uv) >= |df| per edge.

    Requires p > 1 (strictly convex objective, unique minimizer).  The
    local slope is feasible and serves as the starting point, so the
    result never exceeds it in L^p norm.
    """
    if not p > 1:
        raise ValueError(f"lp_minimal_gradient requires p > 1, got {p}")
    if f.graph != g:
        raise ValueError("function does not live on this graph")
    start = local_slope_gradient(g, f)
    i = g.edge_index[:, 0]
    j = g.edge_index[:, 1]
    jumps = np.abs(f.values[i] - f.values[j])
    active = jumps > 0
    if not active.any():
        return VertexFunction.zeros(g)
    rows = np.flatnonzero(active)
    A = np.zeros((len(rows), g.n))
    half_len = 0.5 * g.edge_length[rows]
    A[np.arange(len(rows)), i[rows]] = half_len
    A[np.arange(len(rows)), j[rows]] += half_len
    res = minimize_power_objective(A, jumps[rows], g.mass, p, x0=start.values, **solver_kwargs)
    return VertexFunction(g, res.x)


@dataclass(frozen=True)
class GradientPair:
    """A function together with one of its upper gradients.

    kind is 'local_slope' or 'lp_minimal'.  Construction validates
    nonnegativity and the per-edge trapezoid inequality.
    """

    f: VertexFunction
    g: VertexFunction
    kind: str

    def __post_init__(self):
        if self.kind not in ("local_slope", "lp_minimal"):
            raise ValueError(f"unknown gradient kind {self.kind!r}")
        graph = self.f.graph
        if self.g.graph != graph:
            raise ValueError("function and gradient live on different graphs")
        if np.any(self.g.values < 0):
            raise ValueError("upper gradient must be nonnegative")
        if graph.num_edges:
            i = graph.edge_index[:, 0]
            j = graph.edge_index[:, 1]
            lhs = np.abs(self.f.values[i] - self.f.values[j])
            rhs = 0.5 * (self.g.values[i] + self.g.values[j]) * graph.edge_length
            if np.any(lhs > rhs + 1e-12 * (1.0 + np.abs(rhs))):
                raise ValueError("per-edge upper gradient inequality fails")

    @classmethod
    def local_slope(cls, graph: MetricGraph, f: VertexFunction) -> "GradientPair":
        return cls(f, local_slope_gradient(graph, f), "local_slope")

    @classmethod
    def lp_minimal(cls, graph: MetricGraph, f: VertexFunction, p: float, **kw) -> "GradientPair":
        return cls(f, lp_minimal_gradient(graph, f, p, **kw), "lp_minimal")

    def norm(self, p: float, subset=None) -> float:
        return lp_norm(self.f.graph, self.g, p, subset)
