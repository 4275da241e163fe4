"""Connected weighted graphs as finite metric measure spaces.

A graph carries a positive vertex measure mu and positive edge lengths.
Curves are vertex sequences traversing consecutive edges; integrals of
densities along curves use the trapezoid rule on each edge, so a density
rho contributes (rho(u) + rho(v)) / 2 * length(uv) per traversal of uv.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import networkx as nx
import numpy as np


class GraphError(ValueError):
    """Raised when a graph description violates the construction contract."""


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Immutable connected graph with vertex masses and edge lengths.

    Vertices are identified by strings and keep their declaration order;
    arrays (masses, edge tables) are aligned with that order.  Build
    instances through :func:`build_graph`.
    """

    ids: tuple[str, ...]
    mass: np.ndarray          # shape (n,), positive
    edge_index: np.ndarray    # shape (m, 2), int, i < j rows
    edge_length: np.ndarray   # shape (m,), positive

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def num_edges(self) -> int:
        return len(self.edge_length)

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.ids)}

    @cached_property
    def adjacency(self) -> tuple[tuple[np.ndarray, np.ndarray], ...]:
        """Per vertex: (array of neighbor indices, array of edge lengths)."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        lens: list[list[float]] = [[] for _ in range(self.n)]
        for (i, j), ell in zip(self.edge_index, self.edge_length):
            nbrs[i].append(j)
            lens[i].append(ell)
            nbrs[j].append(i)
            lens[j].append(ell)
        return tuple(
            (np.asarray(a, dtype=int), np.asarray(b, dtype=float))
            for a, b in zip(nbrs, lens)
        )

    @cached_property
    def _edge_set(self) -> set[tuple[int, int]]:
        return {(int(i), int(j)) for i, j in self.edge_index}

    def has_edge(self, u: str, v: str) -> bool:
        i, j = self.index[u], self.index[v]
        return (min(i, j), max(i, j)) in self._edge_set

    def edge_length_between(self, u: str, v: str) -> float:
        i, j = self.index[u], self.index[v]
        key = (min(i, j), max(i, j))
        if key not in self._edge_lengths_by_pair:
            raise GraphError(f"no edge between {u!r} and {v!r}")
        return self._edge_lengths_by_pair[key]

    @cached_property
    def _edge_lengths_by_pair(self) -> dict[tuple[int, int], float]:
        return {
            (int(i), int(j)): float(ell)
            for (i, j), ell in zip(self.edge_index, self.edge_length)
        }

    def neighbors(self, v: str) -> tuple[str, ...]:
        idx, _ = self.adjacency[self.index[v]]
        return tuple(self.ids[i] for i in idx)

    def total_mass(self, subset=None) -> float:
        if subset is None:
            return float(self.mass.sum())
        return float(sum(self.mass[self.index[v]] for v in subset))

    @cached_property
    def _nx(self) -> nx.Graph:
        G = nx.Graph()
        G.add_nodes_from(self.ids)
        for (i, j), ell in zip(self.edge_index, self.edge_length):
            G.add_edge(self.ids[i], self.ids[j], length=float(ell))
        return nx.freeze(G)

    def distance(self, u: str, v: str) -> float:
        """Shortest-path distance with respect to edge lengths."""
        return float(nx.shortest_path_length(self._nx, u, v, weight="length"))

    def diameter(self) -> float:
        best = 0.0
        lengths = dict(nx.all_pairs_dijkstra_path_length(self._nx, weight="length"))
        for u in self.ids:
            for v in self.ids:
                best = max(best, lengths[u][v])
        return float(best)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MetricGraph):
            return NotImplemented
        return (
            self.ids == other.ids
            and np.array_equal(self.mass, other.mass)
            and np.array_equal(self.edge_index, other.edge_index)
            and np.array_equal(self.edge_length, other.edge_length)
        )

    def __hash__(self) -> int:
        return hash((self.ids, self.edge_index.tobytes(), self.edge_length.tobytes()))

    def __repr__(self) -> str:
        return f"MetricGraph(n={self.n}, edges={self.num_edges})"


def build_graph(vertices, edges) -> MetricGraph:
    """Build a validated MetricGraph.

    Parameters
    ----------
    vertices : iterable of (id, mass)
        Vertex identifiers (strings) with positive masses, in the order
        they should be indexed.
    edges : iterable of (id1, id2, length)
        Undirected edges with positive lengths.  Self loops and repeated
        edges are rejected.

    Raises
    ------
    GraphError
        On nonpositive mass or length, unknown endpoints, duplicate
        vertices or edges, self loops, or a disconnected graph.
    """
    ids: list[str] = []
    masses: list[float] = []
    seen: set[str] = set()
    for v, m in vertices:
        v = str(v)
        if v in seen:
            raise GraphError(f"duplicate vertex {v!r}")
        m = float(m)
        if not m > 0:
            raise GraphError(f"vertex {v!r} has nonpositive mass {m}")
        seen.add(v)
        ids.append(v)
        masses.append(m)
    if not ids:
        raise GraphError("graph needs at least one vertex")

    index = {v: i for i, v in enumerate(ids)}
    rows: list[tuple[int, int]] = []
    lengths: list[float] = []
    edge_seen: set[tuple[int, int]] = set()
    for u, v, ell in edges:
        u, v = str(u), str(v)
        for w in (u, v):
            if w not in index:
                raise GraphError(f"edge endpoint {w!r} is not a declared vertex")
        if u == v:
            raise GraphError(f"self loop at {u!r}")
        ell = float(ell)
        if not ell > 0:
            raise GraphError(f"edge ({u!r}, {v!r}) has nonpositive length {ell}")
        key = (min(index[u], index[v]), max(index[u], index[v]))
        if key in edge_seen:
            raise GraphError(f"duplicate edge between {u!r} and {v!r}")
        edge_seen.add(key)
        rows.append(key)
        lengths.append(ell)

    g = MetricGraph(
        ids=tuple(ids),
        mass=np.asarray(masses, dtype=float),
        edge_index=np.asarray(rows, dtype=int).reshape(-1, 2),
        edge_length=np.asarray(lengths, dtype=float),
    )
    g.mass.setflags(write=False)
    g.edge_index.setflags(write=False)
    g.edge_length.setflags(write=False)
    if g.n > 1 and not nx.is_connected(g._nx):
        comps = [sorted(c) for c in nx.connected_components(g._nx)]
        raise GraphError(f"graph is disconnected: components {comps}")
    return g


def path_graph(n: int, mass: float = 1.0, length: float = 1.0) -> MetricGraph:
    """Path on n vertices labeled '0'..'n-1' with constant data."""
    verts = [(str(i), mass) for i in range(n)]
    edges = [(str(i), str(i + 1), length) for i in range(n - 1)]
    return build_graph(verts, edges)


def grid_graph(rows: int, cols: int, mass: float = 1.0, length: float = 1.0) -> MetricGraph:
    """rows x cols grid with vertices labeled 'r,c'."""
    verts = [(f"{r},{c}", mass) for r in range(rows) for c in range(cols)]
    edges = []
    for r in range(rows):
        for c in range(cols):
            if c + 1 < cols:
                edges.append((f"{r},{c}", f"{r},{c + 1}", length))
            if r + 1 < rows:
                edges.append((f"{r},{c}", f"{r + 1},{c}", length))
    return build_graph(verts, edges)


@dataclass(frozen=True)
class Curve:
    """A curve: vertex sequence of length >= 2 traversing consecutive edges.

    The sequence may revisit vertices and edges; integrals count every
    traversal.  Validation against a particular graph happens at the
    operations that need it.
    """

    vertices: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(str(v) for v in self.vertices))
        if len(self.vertices) < 2:
            raise ValueError("a curve needs at least two vertices (constant curves are not representable)")

    @property
    def num_edges(self) -> int:
        return len(self.vertices) - 1

    def edge_pairs(self):
        return zip(self.vertices[:-1], self.vertices[1:])

    def length(self, g: MetricGraph) -> float:
        return sum(g.edge_length_between(u, v) for u, v in self.edge_pairs())


@dataclass(frozen=True, eq=False)
class CurveFamily:
    """Ordered collection of distinct curves.

    contains_constant_curves records that degenerate point curves were
    deliberately attached to the family; they carry no representation,
    but the modulus of such a family is infinite by convention.
    """

    curves: tuple[Curve, ...]
    tag: str | None = None
    contains_constant_curves: bool = False

    def __post_init__(self):
        deduped = tuple(dict.fromkeys(self.curves))
        object.__setattr__(self, "curves", deduped)

    def __iter__(self):
        return iter(self.curves)

    def __len__(self) -> int:
        return len(self.curves)

    def union(self, other: "CurveFamily") -> "CurveFamily":
        return CurveFamily(
            self.curves + other.curves,
            tag=None,
            contains_constant_curves=self.contains_constant_curves or other.contains_constant_curves,
        )


@dataclass(frozen=True, eq=False)
class VertexFunction:
    """Real-valued function on every vertex of a graph, stored as an array
    aligned with the graph's vertex order."""

    graph: MetricGraph
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.graph.n,):
            raise ValueError(
                f"expected {self.graph.n} values, got shape {vals.shape}"
            )
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_mapping(cls, g: MetricGraph, mapping) -> "VertexFunction":
        return cls(g, np.asarray([mapping[v] for v in g.ids], dtype=float))

    @classmethod
    def constant(cls, g: MetricGraph, c: float) -> "VertexFunction":
        return cls(g, np.full(g.n, float(c)))

    @classmethod
    def zeros(cls, g: MetricGraph) -> "VertexFunction":
        return cls(g, np.zeros(g.n))

    def __call__(self, v: str) -> float:
        return float(self.values[self.graph.index[v]])

    def _check_same_graph(self, other: "VertexFunction"):
        if self.graph is not other.graph and self.graph != other.graph:
            raise ValueError("vertex functions live on different graphs")

    def __add__(self, other: "VertexFunction") -> "VertexFunction":
        self._check_same_graph(other)
        return VertexFunction(self.graph, self.values + other.values)

    def __sub__(self, other: "VertexFunction") -> "VertexFunction":
        self._check_same_graph(other)
        return VertexFunction(self.graph, self.values - other.values)

    def __mul__(self, c) -> "VertexFunction":
        return VertexFunction(self.graph, self.values * float(c))

    __rmul__ = __mul__

    def __neg__(self) -> "VertexFunction":
        return VertexFunction(self.graph, -self.values)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VertexFunction):
            return NotImplemented
        return self.graph == other.graph and np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"VertexFunction({np.array2string(self.values, precision=4)})"


def line_integral(g: MetricGraph, rho: VertexFunction, curve: Curve) -> float:
    """Integrate a density along a curve by the per-edge trapezoid rule.

    Each traversed edge uv contributes (rho(u) + rho(v)) / 2 * length(uv),
    with multiplicity for repeated traversals.
    """
    vals = rho.values
    idx = g.index
    total = 0.0
    for u, v in curve.edge_pairs():
        ell = g.edge_length_between(u, v)  # raises GraphError if absent
        total += 0.5 * (vals[idx[u]] + vals[idx[v]]) * ell
    return total


def lp_norm(g: MetricGraph, u: VertexFunction, p: float, subset=None) -> float:
    """L^p(mu) norm of u over a vertex subset (all vertices when omitted)."""
    if not p >= 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    if subset is None:
        vals = u.values
        w = g.mass
    else:
        subset = tuple(subset)
        if not subset:
            raise ValueError("subset must be nonempty")
        sel = np.asarray([g.index[v] for v in subset], dtype=int)
        vals = u.values[sel]
        w = g.mass[sel]
    return float(np.sum(w * np.abs(vals) ** p) ** (1.0 / p))


def enumerate_paths(g: MetricGraph, sources, targets, max_hops: int, cap: int = 100_000) -> CurveFamily:
    """Enumerate simple paths from the source set to the target set.

    Paths use between 1 and max_hops edges and never repeat a vertex.
    Constant curves are never emitted, so sources and targets may overlap.
    Raises ValueError when the family would exceed `cap` curves.
    """
    sources = [str(v) for v in sources]
    targets = {str(v) for v in targets}
    if not sources or not targets:
        raise ValueError("source and target sets must be nonempty")
    for v in list(sources) + list(targets):
        if v not in g.index:
            raise GraphError(f"unknown vertex {v!r}")
    if max_hops < 1:
        raise ValueError("max_hops must be at least 1")

    curves: list[Curve] = []
    # keep source order deterministic and aligned with the graph's vertex order
    for s in sorted(set(sources), key=g.index.__getitem__):
        goal = targets - {s}
        if not goal:
            continue
        for path in nx.all_simple_paths(g._nx, s, goal, cutoff=max_hops):
            if len(path) < 2:
                continue
            curves.append(Curve(tuple(path)))
            if len(curves) > cap:
                raise ValueError(
                    f"path enumeration exceeded cap of {cap} curves; "
                    "raise the cap or lower max_hops"
                )
    tag = f"paths({'|'.join(sorted(set(sources)))} -> {'|'.join(sorted(targets))}, <= {max_hops} hops)"
    return CurveFamily(tuple(curves), tag=tag)
