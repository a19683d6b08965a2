"""Certified lower bounds on scalarised support values.

For weights (l1, l2, l3) with s = l1 + l2 + l3 the weighted triple of a
channel splits over the values of Q:

    l1*r1 + l2*r2 + l3*z = const + sum_q p(q) F(p(x,y|q)),
    F(pi) = (l1+l3) H(pi_X) + (l2+l3) H(pi_Y) - s H(pi),

so its infimum over all Q is the lower convex envelope of F at p(x,y).
Any affine minorant <lam, .> + c of F therefore gives a lower bound
<lam, p> + c.  ``lam`` comes from a linear program over a simplex grid;
the offset c is certified by branch and bound on simplices, using that
F - <lam, .> is a concave function plus the convex -s H.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .kernels import compositions

LOG2E = 1.0 / np.log(2.0)


def _neg_plogp_sum(a: np.ndarray, axis) -> np.ndarray:
    safe = np.where(a > 0, a, 1.0)
    return -np.sum(np.where(a > 0, a * np.log2(safe), 0.0), axis=axis)


class EnvelopeProblem:
    """F and its pieces for one pmf support and one weight vector."""

    def __init__(self, p, cx, cy, nx, ny, weights):
        self.p = np.asarray(p, dtype=float)
        self.n = len(self.p)
        l1, l2, l3 = (float(v) for v in weights)
        self.ax, self.by, self.s = l1 + l3, l2 + l3, l1 + l2 + l3
        self.mx = np.zeros((self.n, nx))
        self.mx[np.arange(self.n), cx] = 1.0
        self.my = np.zeros((self.n, ny))
        self.my[np.arange(self.n), cy] = 1.0

    def concave_part(self, pts: np.ndarray) -> np.ndarray:
        """(l1+l3) H(pi_X) + (l2+l3) H(pi_Y) for points on the last axis."""
        return self.ax * _neg_plogp_sum(pts @ self.mx, -1) + self.by * _neg_plogp_sum(pts @ self.my, -1)

    def F(self, pts: np.ndarray) -> np.ndarray:
        return self.concave_part(pts) - self.s * _neg_plogp_sum(pts, -1)


def simplex_grid(n: int, G: int) -> np.ndarray:
    return compositions(G, n) / G


def lp_minorant(points: np.ndarray, fvals: np.ndarray, p: np.ndarray):
    """Best affine minorant at ``p`` of the data (points, fvals).

    Returns (value, lam): the envelope of the data at p (an achievable
    value when the points are posteriors) and the slope vector.
    """
    res = linprog(-p, A_ub=points, b_ub=fvals, bounds=[(None, None)] * len(p), method="highs")
    if res.status != 0:
        raise RuntimeError(f"envelope LP failed: {res.message}")
    return float(-res.fun), res.x


def certify_minorant(prob: EnvelopeProblem, lam: np.ndarray, eps: float = 1e-5,
                     max_cells: int = 400_000):
    """Certified lower bound on min over the simplex of F(pi) - <lam, pi>.

    Branch and bound with longest-edge bisection.  On a cell with
    barycentre c the convex part -s H(pi) is bounded below by its tangent
    s <pi, log2 c>, which leaves a concave function minimised at a
    vertex.  Returns (lower, best_point) where ``best_point`` is the
    vertex with the smallest value seen.
    """
    n = prob.n

    def phi(pts):
        return prob.F(pts) - pts @ lam

    cells = np.eye(n)[None, :, :]  # (cells, vertices, coords)
    vals = phi(cells[0])
    ub = float(vals.min())
    best = cells[0][int(vals.argmin())].copy()
    evaluated = 0
    open_lb = np.inf
    while len(cells):
        evaluated += len(cells)
        bary = cells.mean(axis=1)
        logc = np.where(bary > 0, np.log2(np.where(bary > 0, bary, 1.0)), 0.0)
        tangent = prob.s * np.einsum("cvi,ci->cv", cells, logc)
        conc = prob.concave_part(cells) - cells @ lam
        lb = (conc + tangent).min(axis=1)
        keep = lb < ub - eps
        cells = cells[keep]
        if not len(cells):
            break
        if evaluated > max_cells:
            open_lb = float(lb[keep].min())
            break
        # bisect the longest edge of every surviving cell
        nv = cells.shape[1]
        ia, ib = np.triu_indices(nv, 1)
        lens = np.abs(cells[:, ia, :] - cells[:, ib, :]).sum(axis=2)
        e = lens.argmax(axis=1)
        a, b = ia[e], ib[e]
        rows = np.arange(len(cells))
        mid = 0.5 * (cells[rows, a] + cells[rows, b])
        mv = phi(mid)
        k = int(mv.argmin())
        if mv[k] < ub:
            ub = float(mv[k])
            best = mid[k].copy()
        left = cells.copy()
        left[rows, a] = mid
        right = cells.copy()
        right[rows, b] = mid
        cells = np.concatenate([left, right])
    return min(ub - eps, open_lb), best


@dataclass(frozen=True)
class EnvelopeBound:
    lower: float  # certified lower bound of the variable part
    upper: float  # envelope of F over the sample points (achievable)
    lam: np.ndarray


def envelope_bounds(p, cx, cy, nx, ny, weights, grid: int | None = None,
                    rounds: int = 4, eps: float = 1e-5) -> EnvelopeBound:
    """Two-sided bounds on min over Q of the variable part of the objective.

    A few cutting-plane rounds add the worst certified point to the LP so
    that the slope ``lam`` adapts to the true envelope, not just the grid.
    """
    prob = EnvelopeProblem(p, cx, cy, nx, ny, weights)
    n = prob.n
    if grid is None:
        grid = {1: 1, 2: 400, 3: 120, 4: 40}.get(n, 12)
    pts = simplex_grid(n, grid)
    fv = prob.F(pts)
    best_lower = -np.inf
    upper = np.inf
    lam = np.zeros(n)
    for _ in range(rounds):
        up, lam_r = lp_minorant(pts, fv, prob.p)
        lo, worst = certify_minorant(prob, lam_r, eps=eps)
        lower_r = float(prob.p @ lam_r + lo)
        upper = min(upper, up)
        if lower_r > best_lower:
            best_lower, lam = lower_r, lam_r
        if upper - best_lower <= 2 * eps:
            break
        pts = np.vstack([pts, worst])
        fv = np.append(fv, prob.F(worst[None, :]))
    return EnvelopeBound(lower=min(best_lower, upper), upper=upper, lam=lam)
