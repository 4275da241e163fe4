"""Plain-text formats for graphs and parabolic step functions.

Graph file: one record per line, `#` starts a comment, blank lines are
ignored.

    v <id> <mass>
    e <id1> <id2> <length>

Vertices keep declaration order; edges may appear in any order after
their endpoints.

Parabolic file (needs the graph for vertex count and order):

    tau <horizon>
    pieces <N>
    piece [a,b) [c,d) ...
    values <x1> ... <xV>
    ...                       (N piece/values blocks)

Each `piece` line lists the half-open intervals of one piece; the
following `values` line gives the vertex values in the order vertices
were declared in the graph file.  The pieces must tile [0, tau).
Floats are written with 17 significant digits, so write/parse round
trips reproduce float64 values exactly.
"""

from __future__ import annotations

import re

import numpy as np

from .graph import MetricGraph, VertexFunction, build_graph
from .parabolic import ParabolicStepFunction, TimePartition


class ParseError(ValueError):
    pass


_INTERVAL_RE = re.compile(r"^\[([^,\s]+),([^)\s]+)\)$")


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _significant_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def _fail(name: str, lineno: int, msg: str):
    raise ParseError(f"{name}:{lineno}: {msg}")


def parse_graph_text(text: str, name: str = "<graph>") -> MetricGraph:
    vertices = []
    edges = []
    for lineno, line in _significant_lines(text):
        parts = line.split()
        kind = parts[0]
        if kind == "v":
            if len(parts) != 3:
                _fail(name, lineno, f"expected 'v <id> <mass>', got {line!r}")
            try:
                mass = float(parts[2])
            except ValueError:
                _fail(name, lineno, f"bad mass {parts[2]!r}")
            vertices.append((parts[1], mass))
        elif kind == "e":
            if len(parts) != 4:
                _fail(name, lineno, f"expected 'e <id1> <id2> <length>', got {line!r}")
            try:
                length = float(parts[3])
            except ValueError:
                _fail(name, lineno, f"bad length {parts[3]!r}")
            edges.append((parts[1], parts[2], length))
        else:
            _fail(name, lineno, f"unknown record {kind!r} (expected 'v' or 'e')")
    if not vertices:
        _fail(name, 0, "no vertices declared")
    return build_graph(vertices, edges)


def parse_graph_file(path) -> MetricGraph:
    with open(path) as fh:
        return parse_graph_text(fh.read(), name=str(path))


def write_graph_text(g: MetricGraph) -> str:
    lines = []
    for v, m in zip(g.ids, g.mass):
        lines.append(f"v {v} {_fmt(m)}")
    for (i, j), ell in zip(g.edge_index, g.edge_length):
        lines.append(f"e {g.ids[i]} {g.ids[j]} {_fmt(ell)}")
    return "\n".join(lines) + "\n"


def write_graph_file(g: MetricGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_graph_text(g))


def _parse_interval(token: str, name: str, lineno: int):
    m = _INTERVAL_RE.match(token)
    if not m:
        _fail(name, lineno, f"bad interval {token!r} (expected '[a,b)')")
    try:
        return float(m.group(1)), float(m.group(2))
    except ValueError:
        _fail(name, lineno, f"bad interval endpoints in {token!r}")


def parse_parabolic_text(text: str, g: MetricGraph, name: str = "<parabolic>") -> ParabolicStepFunction:
    lines = list(_significant_lines(text))
    pos = 0

    def take(expected: str):
        nonlocal pos
        if pos >= len(lines):
            _fail(name, lines[-1][0] if lines else 0, f"missing {expected!r} record")
        lineno, line = lines[pos]
        pos += 1
        return lineno, line.split()

    lineno, parts = take("tau")
    if parts[0] != "tau" or len(parts) != 2:
        _fail(name, lineno, f"expected 'tau <horizon>', got {' '.join(parts)!r}")
    tau = float(parts[1])

    lineno, parts = take("pieces")
    if parts[0] != "pieces" or len(parts) != 2:
        _fail(name, lineno, f"expected 'pieces <N>', got {' '.join(parts)!r}")
    try:
        n_pieces = int(parts[1])
    except ValueError:
        _fail(name, lineno, f"bad piece count {parts[1]!r}")

    pieces = []
    values = []
    for _ in range(n_pieces):
        lineno, parts = take("piece")
        if parts[0] != "piece" or len(parts) < 2:
            _fail(name, lineno, f"expected 'piece [a,b) ...', got {' '.join(parts)!r}")
        pieces.append([_parse_interval(tok, name, lineno) for tok in parts[1:]])
        lineno, parts = take("values")
        if parts[0] != "values":
            _fail(name, lineno, f"expected 'values ...', got {' '.join(parts)!r}")
        if len(parts) - 1 != g.n:
            _fail(
                name,
                lineno,
                f"expected {g.n} vertex values, got {len(parts) - 1}",
            )
        try:
            values.append(np.asarray([float(x) for x in parts[1:]]))
        except ValueError:
            _fail(name, lineno, "bad vertex value")
    if pos != len(lines):
        _fail(name, lines[pos][0], "trailing content after the declared pieces")

    partition = TimePartition(tau, pieces)
    return ParabolicStepFunction(
        g, partition, tuple(VertexFunction(g, v) for v in values)
    )


def parse_parabolic_file(path, g: MetricGraph) -> ParabolicStepFunction:
    with open(path) as fh:
        return parse_parabolic_text(fh.read(), g, name=str(path))


def write_parabolic_text(f: ParabolicStepFunction) -> str:
    lines = [f"tau {_fmt(f.tau)}", f"pieces {len(f.values)}"]
    for piece, v in zip(f.partition.pieces, f.values):
        ivs = " ".join(f"[{_fmt(a)},{_fmt(b)})" for a, b in piece)
        lines.append(f"piece {ivs}")
        lines.append("values " + " ".join(_fmt(x) for x in v.values))
    return "\n".join(lines) + "\n"


def write_parabolic_file(f: ParabolicStepFunction, path) -> None:
    with open(path, "w") as fh:
        fh.write(write_parabolic_text(f))
