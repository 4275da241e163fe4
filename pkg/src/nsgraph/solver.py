"""First-order solver for weighted p-th power minimization over a polyhedron.

Solves   minimize  sum_i w_i x_i^p
         subject   A x >= b,  x >= 0,
with w >= 0, A >= 0 entrywise and b > 0, the shape shared by the curve
modulus and the minimal upper gradient programs.  The inner loop is
projected gradient descent (projection is a clamp to the nonnegative
orthant) with Barzilai-Borwein steps and Armijo backtracking; the linear
constraints are enforced by an augmented Lagrangian outer loop.  Because
the objective is p-homogeneous and the constraints are downward closed,
any iterate x with m = min_i (A x / b)_i > 0 yields the feasible point
x / m, whose objective value is tracked as the certified upper bound.

For p = 1 the objective is smoothed near zero (sqrt(x^2 + delta^2)) to
stabilize the descent, and the returned point is polished to a vertex of
the feasible polytope by greedy coordinate shrinking.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class SolverResult:
    x: np.ndarray
    value: float
    iterations: int
    violation: float
    converged: bool


class SolverError(RuntimeError):
    """Non-convergence within the iteration budget; carries the best iterate."""

    def __init__(self, message: str, best: SolverResult):
        super().__init__(message)
        self.best = best


def _objective(x, w, p):
    return float(np.sum(w * x ** p))


def _feasible_scale(An, x):
    """min_i (An x)_i, the factor by which x must be divided for feasibility."""
    return float(np.min(An @ x)) if len(An) else np.inf


def _greedy_shrink(An, x, passes=200, tol=1e-15):
    """Shrink coordinates one at a time while keeping An x >= 1.

    Descent polish for the linear objective; terminates at a point where
    no single coordinate can decrease, i.e. an extreme point of the
    optimal face in practice.
    """
    x = x.copy()
    r = An @ x
    for _ in range(passes):
        moved = 0.0
        for j in range(len(x)):
            col = An[:, j]
            support = col > 0
            if not support.any():
                new = 0.0
            else:
                base = r[support] - col[support] * x[j]
                new = float(np.max((1.0 - base) / col[support]))
                new = max(new, 0.0)
            if new < x[j]:
                moved = max(moved, x[j] - new)
                r += col * (new - x[j])
                x[j] = new
        if moved <= tol * max(1.0, float(np.max(x, initial=0.0))):
            break
    return x


def minimize_power_objective(
    A,
    b,
    weights,
    p,
    x0=None,
    max_iterations: int = 1_000_000,
    value_tol: float = 1e-11,
    feasibility_tol: float = 1e-9,
    smoothing: float = 1e-6,
) -> SolverResult:
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.asarray(weights, dtype=float)
    if A.ndim != 2:
        raise ValueError("A must be a matrix")
    n = A.shape[1]
    if not p >= 1:
        raise ValueError(f"p must satisfy p >= 1, got {p}")
    if np.any(b <= 0):
        raise ValueError("constraint right-hand sides must be positive")
    if np.any(A < 0):
        raise ValueError("constraint coefficients must be nonnegative")
    if np.any(A.sum(axis=1) <= 0):
        raise ValueError("a constraint row has empty support; the program is infeasible")

    An = A / b[:, None]

    # feasible start: uniform direction scaled onto the constraint boundary
    if x0 is None:
        x = np.ones(n)
    else:
        x = np.maximum(np.asarray(x0, dtype=float).copy(), 0.0)
        if _feasible_scale(An, x) <= 0:
            x = np.ones(n)
    x /= _feasible_scale(An, x)

    delta = smoothing * max(float(np.max(x)), 1e-300) if p == 1 else 0.0

    def smooth_obj(y):
        if p == 1:
            return float(np.sum(w * (np.sqrt(y * y + delta * delta))))
        return float(np.sum(w * y ** p))

    def smooth_grad(y):
        if p == 1:
            return w * y / np.sqrt(y * y + delta * delta)
        return p * w * y ** (p - 1.0)

    best_x = x.copy()
    best_value = _objective(best_x, w, p)

    lam = np.zeros(len(An))
    sigma = max(1.0, best_value)
    iterations = 0
    prev_best = np.inf
    stable_rounds = 0
    prev_viol = np.inf
    converged = False

    max_outer = 80
    for outer in range(max_outer):
        inner_tol = max(1e-13, 1e-6 * (0.1 ** outer))

        def phi_and_grad(y):
            slack = lam + sigma * (1.0 - An @ y)
            act = np.maximum(slack, 0.0)
            val = smooth_obj(y) + float(act @ act - lam @ lam) / (2.0 * sigma)
            grad = smooth_grad(y) - An.T @ act
            return val, grad

        val, grad = phi_and_grad(x)
        step = 1.0 / max(float(np.linalg.norm(grad)), 1e-12)
        inner_cap = 4000
        for _ in range(inner_cap):
            if iterations >= max_iterations:
                break
            iterations += 1
            # Armijo backtracking along the projected path
            accepted = False
            t = step
            for _ in range(60):
                x_new = np.maximum(x - t * grad, 0.0)
                val_new, grad_new = phi_and_grad(x_new)
                if val_new <= val + 1e-4 * float(grad @ (x_new - x)) or np.allclose(x_new, x):
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                break
            dx = x_new - x
            dg = grad_new - grad
            sts = float(dx @ dx)
            sty = float(dx @ dg)
            step = sts / sty if sty > 1e-300 else t * 2.0
            step = min(max(step, 1e-14), 1e14)
            move = float(np.linalg.norm(dx))
            x, val, grad = x_new, val_new, grad_new
            if move <= inner_tol * (1.0 + float(np.linalg.norm(x))):
                break

        m = _feasible_scale(An, x)
        if m > 0:
            cand = x / m
            cand_value = _objective(cand, w, p)
            if cand_value < best_value:
                best_value = cand_value
                best_x = cand
        viol = float(np.max(np.maximum(1.0 - An @ x, 0.0), initial=0.0))

        lam = np.maximum(lam + sigma * (1.0 - An @ x), 0.0)
        if viol > 0.25 * prev_viol and viol > feasibility_tol:
            sigma = min(sigma * 8.0, 1e14 * max(1.0, best_value))
        prev_viol = viol

        if abs(best_value - prev_best) <= value_tol * max(1.0, abs(best_value)):
            stable_rounds += 1
        else:
            stable_rounds = 0
        prev_best = best_value
        if stable_rounds >= 3 and viol <= feasibility_tol:
            converged = True
            break
        if iterations >= max_iterations:
            break

    if p == 1:
        polished = _greedy_shrink(An, best_x)
        m = _feasible_scale(An, polished)
        if m > 0:
            polished /= m
            pv = _objective(polished, w, p)
            if pv <= best_value:
                best_x, best_value = polished, pv

    # exact rescale onto the constraint boundary
    m = _feasible_scale(An, best_x)
    best_x = best_x / m
    best_value = _objective(best_x, w, p)
    violation = float(np.max(np.maximum(b - A @ best_x, 0.0) / b, initial=0.0))

    result = SolverResult(
        x=best_x,
        value=best_value,
        iterations=iterations,
        violation=violation,
        converged=converged,
    )
    if not converged:
        raise SolverError(
            f"no convergence after {iterations} iterations "
            f"(value {best_value:.6g}, violation {violation:.2e})",
            best=result,
        )
    return result
