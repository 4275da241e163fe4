"""p-modulus of curve families on weighted graphs.

Mod_p(Gamma) is the least total p-energy sum_x mu(x) rho(x)^p over
nonnegative densities rho that are admissible, i.e. integrate to at
least 1 along every curve of the family.  With trapezoid line integrals
the constraints are linear with nonnegative coefficients, so the program
is convex; it is solved by the projected-gradient / augmented Lagrangian
engine in `solver`.

An independent check is provided by `modulus_bruteforce`: since the
objective is p-homogeneous and the constraint value m(rho) = min over
curves of the line integral is 1-homogeneous, Mod_p(Gamma) equals the
minimum over directions d >= 0 of F(d) / m(d)^p.  That ratio has convex
sublevel sets (convex numerator, concave positive denominator, both
raised to matching powers), so a full-box pattern search with shrinking
radius around the incumbent finds the global minimum.  The two routes
share nothing but the constraint coefficients.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .graph import CurveFamily, MetricGraph, VertexFunction, line_integral
from .solver import minimize_power_objective


@dataclass
class ModulusResult:
    value: float
    extremal_density: VertexFunction | None
    solver_iterations: int
    constraint_violation: float


def _curve_matrix(g: MetricGraph, family: CurveFamily) -> np.ndarray:
    """Trapezoid coefficients: row gamma, column x, entry so that
    (row . rho) equals the line integral of rho along gamma."""
    A = np.zeros((len(family), g.n))
    idx = g.index
    for r, curve in enumerate(family):
        for u, v in curve.edge_pairs():
            half = 0.5 * g.edge_length_between(u, v)
            A[r, idx[u]] += half
            A[r, idx[v]] += half
    return A


def is_admissible(
    g: MetricGraph,
    rho: VertexFunction,
    family: CurveFamily,
    tol: float = 1e-9,
) -> bool:
    """True when every curve integral is at least 1 - tol.

    Negative densities are a contract violation.  The empty family is
    vacuously admissible; a family flagged as containing constant curves
    admits no density at all.
    """
    if np.any(rho.values < 0):
        raise ValueError("density must be nonnegative")
    if family.contains_constant_curves:
        return False
    return all(line_integral(g, rho, c) >= 1.0 - tol for c in family)


def compute_modulus(g: MetricGraph, family: CurveFamily, p: float, **solver_kwargs) -> ModulusResult:
    """Solve for Mod_p(Gamma) and the extremal density.

    The empty family has modulus 0; a family flagged as containing
    constant curves has modulus +inf (a point curve has zero integral
    against every density).  In both cases no density is returned.
    """
    if not p >= 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    if family.contains_constant_curves:
        return ModulusResult(math.inf, None, 0, 0.0)
    if len(family) == 0:
        return ModulusResult(0.0, None, 0, 0.0)
    A = _curve_matrix(g, family)
    res = minimize_power_objective(A, np.ones(len(family)), g.mass, p, **solver_kwargs)
    return ModulusResult(
        value=res.value,
        extremal_density=VertexFunction(g, res.x),
        solver_iterations=res.iterations,
        constraint_violation=res.violation,
    )


def modulus_bruteforce(
    g: MetricGraph,
    family: CurveFamily,
    p: float,
    rounds: int = 70,
    rel_tol: float = 1e-9,
) -> float:
    """Brute-force oracle for Mod_p on small graphs (<= 9 vertices).

    Scans directions on the simplex, then refines with a shrinking box
    grid around the incumbent, clamping to the nonnegative orthant; each
    candidate is scored by its scaled-to-feasibility energy.
    """
    if family.contains_constant_curves:
        return math.inf
    if len(family) == 0:
        return 0.0
    n = g.n
    if n > 9:
        raise ValueError("brute-force oracle is limited to graphs with at most 9 vertices")
    A = _curve_matrix(g, family)
    w = g.mass

    def score(D):
        # D: (k, n) candidate directions; returns feasibility-scaled energies
        m = (A @ D.T).min(axis=0)
        F = (D ** p) @ w
        out = np.full(len(D), np.inf)
        ok = m > 0
        out[ok] = F[ok] / m[ok] ** p
        return out

    # stage 1: simplex sweep
    k = 8 if n <= 5 else 6
    combos = itertools.combinations(range(k + n - 1), n - 1)
    grid = []
    for cut in combos:
        prev = -1
        parts = []
        for c in cut:
            parts.append(c - prev - 1)
            prev = c
        parts.append(k + n - 1 - prev - 1)
        grid.append(parts)
    D = np.asarray(grid, dtype=float)
    D = D[D.sum(axis=1) > 0]
    vals = score(D)
    best = int(np.argmin(vals))
    center, best_val = D[best].copy(), float(vals[best])
    scale = max(center.max(), 1.0)

    # stage 2: shrinking full-box pattern search
    points_per_dim = 5 if n <= 4 else 3
    offsets = np.array(
        list(itertools.product(np.linspace(-1.0, 1.0, points_per_dim), repeat=n))
    )
    radius = scale / k
    stall = 0
    for _ in range(rounds):
        cand = np.maximum(center + radius * offsets, 0.0)
        cand = cand[cand.sum(axis=1) > 0]
        vals = score(cand)
        i = int(np.argmin(vals))
        if vals[i] < best_val * (1.0 - rel_tol):
            stall = 0
        else:
            stall += 1
        if vals[i] < best_val:
            best_val = float(vals[i])
            center = cand[i].copy()
        radius *= 0.5
        if stall >= 3 and radius < 1e-10 * scale:
            break
    return best_val
