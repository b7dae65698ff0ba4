"""Comparison methods: degree sorting, spectral alignment of leading
eigenvectors, and the doubly-stochastic QP relaxation solved by ADMM."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dp import ScoreMatrix
from .graph import Graph, MatchResult, Permutation
from .models import SymMatrix
from .refine import linear_assignment


class EigenConvergenceError(RuntimeError):
    def __init__(self, iterations: int, residual: float):
        self.iterations = iterations
        self.residual = residual
        super().__init__(
            f"power iteration did not converge in {iterations} iterations "
            f"(residual {residual:.3e})")


@dataclass(frozen=True)
class QpParams:
    max_iters: int = 1000
    rho: float = 0.05
    primal_tol: float = 1e-5
    dual_tol: float = 1e-5
    projection_iters: int = 200
    cg_iters: int = 30
    cg_tol: float = 1e-6
    over_relaxation: float = 1.7

    def __post_init__(self):
        if min(self.max_iters, self.projection_iters, self.cg_iters) <= 0:
            raise ValueError("iteration caps must be positive")
        if min(self.rho, self.primal_tol, self.dual_tol, self.cg_tol) <= 0:
            raise ValueError("rho and tolerances must be positive")
        if not (1.0 <= self.over_relaxation < 2.0):
            raise ValueError("over_relaxation must lie in [1, 2)")


@dataclass(frozen=True)
class DoublyStochastic:
    """Matrix with rows/columns summing to 1 within tol, entries >= -tol."""

    entries: np.ndarray
    tol: float = 1e-6

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("must be square")
        if m.size:
            if np.abs(m.sum(axis=0) - 1.0).max() > self.tol \
                    or np.abs(m.sum(axis=1) - 1.0).max() > self.tol:
                raise ValueError("row/column sums deviate from 1 beyond tol")
            if m.min() < -self.tol:
                raise ValueError("entries below -tol")

    @property
    def n(self) -> int:
        return self.entries.shape[0]


def _dense(x) -> np.ndarray:
    return x.entries if isinstance(x, SymMatrix) else x.adjacency_matrix()


def match_degree_sort(a, b) -> MatchResult:
    """Pair the vertices of the two graphs by sorted degree rank (descending,
    ties by index)."""
    if a.n != b.n:
        raise ValueError("size mismatch")
    if isinstance(a, SymMatrix):
        deg_a, deg_b = a.entries.sum(axis=1), b.entries.sum(axis=1)
    else:
        deg_a, deg_b = a.degrees, b.degrees
    order_a = np.lexsort((np.arange(a.n), -np.asarray(deg_a, dtype=np.float64)))
    order_b = np.lexsort((np.arange(b.n), -np.asarray(deg_b, dtype=np.float64)))
    image = np.empty(a.n, dtype=np.int64)
    image[order_a] = order_b
    return MatchResult.success(Permutation(image))


def _start_vector(n: int) -> np.ndarray:
    # Deterministic start with uneven components, so it is not orthogonal to
    # the dominant eigenspace for the structured matrices seen here.
    v = 1.0 + 0.5 * np.cos(np.arange(n, dtype=np.float64))
    return v / np.linalg.norm(v)


def leading_eigenvector(m, tol: float = 1e-8, max_iters: int = 20000
                        ) -> tuple[float, np.ndarray]:
    """Largest-by-value eigenpair via shifted power iteration.

    A short unshifted power phase estimates the spectral radius; shifting by
    1.05x that estimate makes the spectrum positive while keeping the shift
    small enough not to drown the spectral gap. Iteration stops when the
    angle between successive iterates drops below ``tol``. The returned
    vector is unit norm with its first nonzero coordinate positive.
    """
    mat = _dense(m) if isinstance(m, (Graph, SymMatrix)) else np.asarray(m, dtype=np.float64)
    n = mat.shape[0]
    if n == 0:
        raise ValueError("empty matrix")
    v = _start_vector(n)
    if not np.any(mat):
        return 0.0, v  # zero matrix: every vector is an eigenvector
    radius = 0.0
    for _ in range(50):
        w = mat @ v
        radius = float(np.linalg.norm(w))
        if radius == 0.0:
            break
        v = w / radius
    shift = 1.05 * radius + 1e-12
    v = _start_vector(n)
    for _ in range(max_iters):
        w = mat @ v + shift * v
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            raise EigenConvergenceError(0, float("inf"))
        w /= norm
        angle = float(np.arccos(np.clip(abs(w @ v), -1.0, 1.0)))
        v = w
        if angle < tol:
            value = float(v @ (mat @ v))
            lead = np.flatnonzero(np.abs(v) > 1e-12)
            if lead.size and v[lead[0]] < 0:
                v = -v
            return value, v
    residual = float(np.linalg.norm(mat @ v - (v @ (mat @ v)) * v))
    raise EigenConvergenceError(max_iters, residual)


def _qap_objective(a_mat: np.ndarray, b_mat: np.ndarray, image: np.ndarray) -> float:
    return float(np.sum(a_mat * b_mat[np.ix_(image, image)]))


def match_spectral(a, b, tol: float = 1e-8, max_iters: int = 50000) -> MatchResult:
    """Align leading eigenvectors by sorting; both signs of the second
    eigenvector are tried and scored by the QAP objective <A, Pi B Pi^T>."""
    if a.n != b.n:
        raise ValueError("size mismatch")
    if a.n == 0:
        return MatchResult.success(Permutation.identity(0))
    _, u = leading_eigenvector(a, tol, max_iters)
    _, v = leading_eigenvector(b, tol, max_iters)
    a_mat, b_mat = _dense(a), _dense(b)
    best: tuple[float, Permutation] | None = None
    order_u = np.lexsort((np.arange(a.n), u))
    for sign in (1.0, -1.0):
        order_v = np.lexsort((np.arange(b.n), sign * v))
        image = np.empty(a.n, dtype=np.int64)
        image[order_u] = order_v
        perm = Permutation(image)
        obj = _qap_objective(a_mat, b_mat, perm.image)
        if best is None or obj > best[0]:
            best = (obj, perm)
    spread = min(float(u.max() - u.min()), float(v.max() - v.min()))
    return MatchResult.success(best[1], qap_objective=best[0],
                               uninformative=spread < 1e-6)


def _project_row_col_sums(x: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {X : X 1 = 1, X^T 1 = 1}."""
    n = x.shape[0]
    r = 1.0 - x.sum(axis=1)
    c = 1.0 - x.sum(axis=0)
    t = c.sum() / (2.0 * n * n)
    av = r / n - t
    bv = c / n - t
    return x + av[:, None] + bv[None, :]


def project_doubly_stochastic(m: np.ndarray, max_iters: int = 200,
                              tol: float = 1e-8) -> DoublyStochastic:
    """Euclidean projection onto the Birkhoff polytope via Dykstra's
    alternating projections between the sum-constraint affine set and the
    nonnegative orthant."""
    x = np.asarray(m, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ValueError("must be square")
    if x.shape[0] == 0:
        return DoublyStochastic(x)
    p = np.zeros_like(x)
    y = x
    for _ in range(max_iters):
        y = _project_row_col_sums(x)
        z = np.maximum(y + p, 0.0)
        p = y + p - z
        if np.abs(z - x).max() < tol:
            x = z
            break
        x = z
    out = _project_row_col_sums(x)
    # One last clean-up keeps the row/col sums exact; negatives stay > -tol
    # once Dykstra has converged.
    return DoublyStochastic(out, tol=max(1e-6, 10 * tol))


def _quadratic_operator(a_mat, b_mat, a2, b2, x):
    return a2 @ x - 2.0 * (a_mat @ x @ b_mat) + x @ b2


def solve_qp_relaxation(a, b, params: QpParams = QpParams()
                        ) -> tuple[DoublyStochastic, dict]:
    """ADMM for min ||AX - XB||_F^2 over doubly stochastic X.

    The X-update solves (2 L + rho I) X = rho (Y - U) by conjugate gradient
    where L(X) = A^2 X - 2 A X B + X B^2, so the n^2 x n^2 Kronecker operator
    is never formed. A and B are pre-scaled by their larger spectral norm
    (same minimizer set, far better CG conditioning); the reported objective
    uses the raw matrices. Returns the feasible iterate and diagnostics.
    """
    if a.n != b.n:
        raise ValueError("size mismatch")
    n = a.n
    raw_a, raw_b = _dense(a), _dense(b)
    scale = max(np.linalg.norm(raw_a, 2) if raw_a.size else 0.0,
                np.linalg.norm(raw_b, 2) if raw_b.size else 0.0, 1e-12)
    a_mat, b_mat = raw_a / scale, raw_b / scale
    a2, b2 = a_mat @ a_mat, b_mat @ b_mat
    rho = params.rho
    x = np.full((n, n), 1.0 / max(n, 1))
    y = x.copy()
    u = np.zeros((n, n))
    converged = False
    iterations = 0
    relax = params.over_relaxation
    for it in range(params.max_iters):
        iterations = it + 1
        v = rho * (y - u)

        def op(z, _rho=rho):
            return 2.0 * _quadratic_operator(a_mat, b_mat, a2, b2, z) + _rho * z

        x = _conjugate_gradient(op, v, x, params.cg_iters, params.cg_tol)
        x_relaxed = relax * x + (1.0 - relax) * y
        y_prev = y
        y = project_doubly_stochastic(x_relaxed + u, params.projection_iters).entries
        u = u + x_relaxed - y
        primal = float(np.linalg.norm(x - y))
        dual = float(rho * np.linalg.norm(y - y_prev))
        if primal < params.primal_tol and dual < params.dual_tol:
            converged = True
            break
        # Residual balancing every 10th step keeps CG warm starts effective.
        if it % 10 == 9:
            if primal > 10.0 * dual:
                rho *= 2.0
                u /= 2.0
            elif dual > 10.0 * primal:
                rho /= 2.0
                u *= 2.0
    feasible = project_doubly_stochastic(y, params.projection_iters)
    objective = float(np.linalg.norm(raw_a @ feasible.entries
                                     - feasible.entries @ raw_b) ** 2)
    info = {"converged": converged, "iterations": iterations,
            "objective": objective, "rho": rho}
    return feasible, info


def _conjugate_gradient(op, rhs, x0, max_iters: int, tol: float) -> np.ndarray:
    x = x0.copy()
    r = rhs - op(x)
    p = r.copy()
    rs = float(np.vdot(r, r))
    threshold = tol * max(float(np.linalg.norm(rhs)), 1e-30)
    if math.sqrt(rs) <= threshold:
        return x
    for _ in range(max_iters):
        ap = op(p)
        denom = float(np.vdot(p, ap))
        if denom <= 0:
            break
        alpha = rs / denom
        x += alpha * p
        r -= alpha * ap
        rs_new = float(np.vdot(r, r))
        if math.sqrt(rs_new) <= threshold:
            break
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x


def match_qp(a, b, params: QpParams = QpParams()) -> MatchResult:
    """QP relaxation followed by projection onto permutations (linear
    assignment on the solver output)."""
    if a.n != b.n:
        raise ValueError("size mismatch")
    if a.n == 0:
        return MatchResult.success(Permutation.identity(0))
    relaxed, info = solve_qp_relaxation(a, b, params)
    degenerate = not np.any(_dense(a)) and not np.any(_dense(b))
    perm = linear_assignment(ScoreMatrix(relaxed.entries, "larger"))
    return MatchResult.success(perm, degenerate=degenerate, **info)
