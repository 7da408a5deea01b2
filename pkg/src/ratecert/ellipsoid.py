"""Deep-cut ellipsoid method for affine symmetric-matrix feasibility.

Decides whether a system of constraints

    lambda_max( S0_c + sum_i v_i * Si_c ) <= bound_c        (c = 1..K)

has a solution v in a ball of given radius.  Either a point satisfying every
constraint is returned, or infeasibility is certified: the cut sequence
shrinks a bounding ellipsoid until its volume is below that of a ball with
radius ``r_min``, proving that no ball of that radius fits inside the
feasible set.

Cutting planes come from the eigenvector of the most positive eigenvalue of
a violated block: for unit q, the scalar function q^T S(v) q is affine in v
and separates the current center from the feasible set.  Deep cuts (using
the actual violation depth, not just the hyperplane through the center) are
used, which both accelerates volume decrease and detects empty intersections
outright when a cut excludes the whole ellipsoid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import _jacobi_batch


class SolverBudgetExceeded(RuntimeError):
    """Iteration cap reached before a feasible point or a volume certificate."""


@dataclass(frozen=True, eq=False)
class MatrixConstraint:
    """Require lambda_max(s0 + sum_i v_i coeffs[i]) <= bound.

    ``coeffs`` has shape (v_dim, n, n); scalar inequalities are expressed as
    1x1 blocks.
    """

    s0: np.ndarray
    coeffs: np.ndarray
    bound: float


@dataclass(frozen=True)
class EllipsoidOptions:
    radius: float | None = None     # default 10 * sqrt(v_dim)
    r_min: float = 1e-7
    max_iters: int | None = None    # default ceil(10 * v_dim^2 * ln(R / r_min))


class _Run:
    """Consecutive constraints of equal order, evaluated as one batch."""

    def __init__(self, constraints: list[MatrixConstraint]):
        self.n = constraints[0].s0.shape[0]
        self.batch = len(constraints)
        self.s0 = np.stack([c.s0 for c in constraints])                  # (B, n, n)
        self.coeffs = np.stack([c.coeffs for c in constraints], axis=1)  # (d, B, n, n)
        self.bounds = np.array([c.bound for c in constraints])
        d = self.coeffs.shape[0]
        self._s0_flat = self.s0.reshape(-1)
        self._coeffs_flat = np.ascontiguousarray(self.coeffs.reshape(d, -1))

    def evaluate(self, v: np.ndarray) -> np.ndarray:
        """All blocks at decision vector v, shape (B, n, n)."""
        flat = self._s0_flat + v @ self._coeffs_flat
        return flat.reshape(self.batch, self.n, self.n)


def _group_runs(constraints) -> list[tuple[int, _Run]]:
    runs: list[tuple[int, _Run]] = []
    start = 0
    while start < len(constraints):
        end = start + 1
        n = constraints[start].s0.shape[0]
        while end < len(constraints) and constraints[end].s0.shape[0] == n:
            end += 1
        runs.append((start, _Run(constraints[start:end])))
        start = end
    return runs


def ellipsoid_feasibility(
    constraints: list[MatrixConstraint],
    v_dim: int,
    opts: EllipsoidOptions | None = None,
) -> np.ndarray | None:
    """Find a point satisfying every constraint, or certify infeasibility.

    Returns the point, or None when no ball of radius ``opts.r_min`` fits in
    the feasible set intersected with the initial ball.  Raises
    SolverBudgetExceeded when the iteration cap is hit first, which callers
    must treat as "unknown", not as infeasible.
    """
    opts = opts or EllipsoidOptions()
    d = v_dim
    if d < 1:
        raise ValueError("need at least one decision variable")
    for con in constraints:
        if con.coeffs.shape[0] != d:
            raise ValueError("constraint coefficient count != v_dim")
    radius = opts.radius if opts.radius is not None else 10.0 * math.sqrt(d)
    r_min = opts.r_min
    if not (0.0 < r_min < radius):
        raise ValueError("need 0 < r_min < radius")
    max_iters = (
        opts.max_iters
        if opts.max_iters is not None
        else int(math.ceil(10.0 * d * d * math.log(radius / r_min)))
    )

    runs = _group_runs(constraints)
    center = np.zeros(d)

    if d == 1:
        return _interval_search(runs, center, radius, r_min, max_iters)

    shape = radius * radius * np.eye(d)          # E = {x : (x-c)^T Q^-1 (x-c) <= 1}
    logdet = 2.0 * d * math.log(radius)
    logdet_floor = 2.0 * d * math.log(r_min)

    for _ in range(max_iters):
        cut = _first_violated_cut(runs, center)
        if cut is None:
            return center.copy()
        a, depth = cut
        qa = shape @ a
        norm_sq = float(a @ qa)
        if norm_sq <= 0.0:
            # No usable direction: the violated constraint is constant in v.
            return None
        norm = math.sqrt(norm_sq)
        alpha = depth / norm
        if alpha >= 1.0:
            # The half-space aligned with the cut misses the entire ellipsoid.
            return None
        # Deep-cut update.
        tau = (1.0 + d * alpha) / (d + 1.0)
        sigma = 2.0 * (1.0 + d * alpha) / ((d + 1.0) * (1.0 + alpha))
        delta = (d * d / (d * d - 1.0)) * (1.0 - alpha * alpha)
        center = center - tau * qa / norm
        shape = delta * (shape - sigma * np.outer(qa, qa) / norm_sq)
        shape = 0.5 * (shape + shape.T)
        logdet += d * math.log(delta) + math.log1p(-sigma)
        if logdet < logdet_floor:
            return None
    raise SolverBudgetExceeded(
        f"no decision after {max_iters} ellipsoid iterations"
    )


def _first_violated_cut(runs, center) -> tuple[np.ndarray, float] | None:
    """Scan constraints in order; return (cut normal a, violation depth) for
    the first violated one, or None if the center is feasible.

    The cut encodes: feasible set is contained in {v : a . v <= a . center - depth}.
    """
    for _, run in runs:
        blocks = run.evaluate(center)
        vals, vecs = _jacobi_batch(blocks, need_vectors=True)
        violated = np.nonzero(vals[:, -1] > run.bounds)[0]
        if violated.size == 0:
            continue
        i = int(violated[0])
        q = vecs[i, :, -1]
        a = np.einsum("i,dij,j->d", q, run.coeffs[:, i], q)
        g0 = float(q @ run.s0[i] @ q)
        # Affine value at the center; re-derive for consistency with the cut.
        depth = float(a @ center) + g0 - run.bounds[i]
        if depth <= 0.0:
            # Rayleigh quotient dipped below the bound (can happen within
            # round-off of the eigensolver); treat as a central cut.
            depth = 0.0
        return a, depth
    return None


def _interval_search(runs, center, radius, r_min, max_iters):
    """Exact 1-D specialization: the 'ellipsoid' is an interval."""
    lo, hi = center[0] - radius, center[0] + radius
    for _ in range(max_iters):
        c = np.array([0.5 * (lo + hi)])
        cut = _first_violated_cut(runs, c)
        if cut is None:
            return c.copy()
        a, depth = cut
        a0 = float(a[0])
        if a0 == 0.0:
            return None
        # Feasible side: a0 * v <= a0 * c - depth.
        edge = (a0 * c[0] - depth) / a0
        if a0 > 0.0:
            hi = min(hi, edge)
        else:
            lo = max(lo, edge)
        if hi - lo < 2.0 * r_min:
            return None
    raise SolverBudgetExceeded(
        f"no decision after {max_iters} interval iterations"
    )
