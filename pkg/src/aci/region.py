"""Two-sided approximations of the monotone region K(X,Y) and its slices.

A :class:`KRegionApprox` holds achievable triples (the inner approximation:
their convex hull plus the positive octant lies inside K) and support
constraints ``w . t >= value`` (outer data).  Support values are either
``certified`` lower bounds or ``heuristic`` optimizer minima; only
certified ones are allowed to prove that a point lies outside.

All geometric queries on the inner approximation are small linear
programs over the mixing weights of the inner points, since mixing two
auxiliaries with a public coin mixes their triples.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import EmptyInput, EmptySlice, NotReached
from .probdist import AuxChannel, JointPMF, KTriple, entropy, info_summary

HEURISTIC = "heuristic"
CERTIFIED = "certified"
INSIDE, OUTSIDE, UNKNOWN = "inside", "outside", "unknown"

PRUNE_TOL = 1e-9


@dataclass(frozen=True)
class SupportEntry:
    weights: tuple  # (l1, l2, l3)
    value: float
    certainty: str = HEURISTIC

    def as_dict(self) -> dict:
        return {"w": list(self.weights), "value": self.value, "certainty": self.certainty}


@dataclass(frozen=True)
class KRegionApprox:
    inner_points: tuple  # of (KTriple, AuxChannel or None)
    support: tuple  # of SupportEntry
    source: str = ""

    @property
    def points(self) -> np.ndarray:
        return np.array([tuple(t) for t, _ in self.inner_points], dtype=float).reshape(-1, 3)

    def support_value(self, w) -> float:
        """min over inner points of w . t (the inner approximation's support)."""
        return float((self.points @ np.asarray(w, dtype=float)).min())

    def to_dict(self) -> dict:
        return {
            "inner_points": [list(map(float, t)) for t, _ in self.inner_points],
            "support": [s.as_dict() for s in self.support],
            "source": self.source,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "KRegionApprox":
        pts = d.get("inner_points") or []
        if not pts:
            raise EmptyInput("region document has no inner points")
        sup = tuple(
            SupportEntry(tuple(float(v) for v in s["w"]), float(s["value"]), s.get("certainty", HEURISTIC))
            for s in d.get("support", [])
        )
        return cls(tuple((KTriple(*map(float, p)), None) for p in pts), sup, d.get("source", ""))


@dataclass(frozen=True)
class Slice2D:
    kind: str
    axis_value: float
    frontier: tuple  # of (R1, R2), sorted by R1

    def to_csv(self) -> str:
        buf = io.StringIO()
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(["R1", "R2"])
        for a, b in self.frontier:
            wr.writerow([repr(float(a)), repr(float(b))])
        return buf.getvalue()

    def support(self, alpha: float) -> float:
        f = np.array(self.frontier)
        return float((alpha * f[:, 0] + (1 - alpha) * f[:, 1]).min())


# --- pruning ------------------------------------------------------------------

def _nondominated(P: np.ndarray) -> np.ndarray:
    """Indices of points not weakly dominated (within PRUNE_TOL) by a kept point.

    Points are visited in increasing coordinate sum and kept points are never
    revisited, so every dropped point is within tolerance of a kept one.
    """
    order = sorted(range(len(P)), key=lambda i: (float(P[i].sum()), i))
    keep: list[int] = []
    for i in order:
        if keep and np.any(np.all(P[keep] <= P[i] + PRUNE_TOL, axis=1)):
            continue
        keep.append(i)
    return np.array(sorted(keep), dtype=int)


def _redundant(P: np.ndarray, i: int, active: np.ndarray) -> bool:
    """Is P[i] dominated by a convex combination of the other active points?"""
    others = np.nonzero(active)[0]
    others = others[others != i]
    if len(others) == 0:
        return False
    Q = P[others]
    res = linprog(
        np.zeros(len(others)),
        A_ub=Q.T,
        b_ub=P[i] + PRUNE_TOL,
        A_eq=np.ones((1, len(others))),
        b_eq=[1.0],
        bounds=[(0, None)] * len(others),
        method="highs",
    )
    return res.status == 0


def prune(points: list) -> list:
    """Keep only vertices of conv(points) + positive octant."""
    if not points:
        return []
    P = np.array([tuple(t) for t, _ in points], dtype=float)
    idx = _nondominated(P)
    P = P[idx]
    active = np.ones(len(P), dtype=bool)
    for i in range(len(P)):
        if _redundant(P, i, active):
            active[i] = False
    return [points[idx[i]] for i in np.nonzero(active)[0]]


# --- construction -------------------------------------------------------------

def _wkey(w) -> tuple:
    return tuple(round(float(v), 12) for v in w)


def build_region(results, certificates=None, anchors=None, source: str = "sweep") -> KRegionApprox:
    """Region from optimizer results (anything with ``triple``, ``witness``, ``weights``, ``value``).

    ``certificates`` maps weight tuples to certified lower bounds, which
    replace the heuristic support values of those directions.  ``anchors``
    are extra (triple, channel) pairs, e.g. the exact axis witnesses.
    """
    results = list(results)
    if not results and not anchors:
        raise EmptyInput("no optimizer results to build a region from")
    pts = [(KTriple(*map(float, r.triple)), r.witness) for r in results]
    pts += [(KTriple(*map(float, t)), ch) for t, ch in (anchors or [])]
    inner = prune(pts)
    P = np.array([tuple(t) for t, _ in inner])
    certs = {_wkey(k): v for k, v in (certificates or {}).items()}
    support = []
    seen = set()
    for r in results:
        w = r.weights.as_tuple() if hasattr(r.weights, "as_tuple") else tuple(r.weights)
        key = _wkey(w)
        if key in seen:
            continue
        seen.add(key)
        if key in certs:
            support.append(SupportEntry(w, float(certs[key]), CERTIFIED))
        else:
            best_inner = float((P @ np.asarray(w)).min())
            support.append(SupportEntry(w, min(float(r.value), best_inner), HEURISTIC))
    return KRegionApprox(tuple(inner), tuple(support), source)


def region_for(pmf: JointPMF, g: int = 20, opts=None, workers: int | None = None,
               refine: bool = True, axis_anchors: bool = True) -> KRegionApprox:
    """Sweep a pmf and build its region.

    ``refine`` adds the near-z-axis and axis-adjacent directions of
    :func:`aci.auxopt.refine_sweep`; ``axis_anchors`` adds the exact axis
    witnesses from the common-part decomposition as inner points.
    """
    from .auxopt import refine_sweep, sweep
    from .gkops import axis_witnesses
    from .probdist import triple_of

    results = sweep(pmf, g, opts, workers)
    if refine:
        results += refine_sweep(pmf, g, opts, workers)
    anchors = None
    if axis_anchors:
        anchors = [(triple_of(pmf, ch), ch) for ch in axis_witnesses(pmf)]
    src = f"sweep g={g}" + (" +refine" if refine else "") + (" +axis" if axis_anchors else "")
    return build_region(results, anchors=anchors, source=src)


def certify_region(region: KRegionApprox, pmf: JointPMF, directions=None,
                   max_directions: int | None = None) -> KRegionApprox:
    """Replace heuristic support values by certified lower bounds.

    Only possible for pmfs with at most four support cells.  Directions
    default to the heuristic entries of the region, taken in decreasing
    order of value (the ones farthest from the origin first).
    """
    from .auxopt import ScalarWeights, certified_support

    entries = list(region.support)
    if directions is None:
        order = sorted(
            (i for i, s in enumerate(entries) if s.certainty != CERTIFIED),
            key=lambda i: -entries[i].value,
        )
    else:
        want = {_wkey(w) for w in directions}
        order = [i for i, s in enumerate(entries) if _wkey(s.weights) in want]
        missing = want - {_wkey(entries[i].weights) for i in order}
        for w in sorted(missing):
            entries.append(SupportEntry(w, -np.inf, HEURISTIC))
            order.append(len(entries) - 1)
    if max_directions is not None:
        order = order[:max_directions]
    for i in order:
        w = entries[i].weights
        lower, _ = certified_support(pmf, ScalarWeights.normalized(*w))
        entries[i] = SupportEntry(tuple(w), float(lower), CERTIFIED)
    return KRegionApprox(region.inner_points, tuple(entries), region.source + "+certified")


# --- queries ------------------------------------------------------------------

def _dominates_mixture(P: np.ndarray, target: np.ndarray) -> bool:
    n = len(P)
    res = linprog(
        np.zeros(n), A_ub=P.T, b_ub=target, A_eq=np.ones((1, n)), b_eq=[1.0],
        bounds=[(0, None)] * n, method="highs",
    )
    return res.status == 0


def contains(region: KRegionApprox, p, tol: float = 1e-7) -> str:
    """Tri-state membership of the triple ``p``.

    ``inside`` when p + tol*(1,1,1) dominates a mixture of inner points,
    ``outside`` when a certified support constraint is violated by more
    than tol, ``unknown`` otherwise.
    """
    p = np.asarray(tuple(p), dtype=float)
    if _dominates_mixture(region.points, p + tol):
        return INSIDE
    for s in region.support:
        if s.certainty == CERTIFIED and float(np.dot(s.weights, p)) < s.value - tol:
            return OUTSIDE
    return UNKNOWN


def certifying_direction(region: KRegionApprox, p, tol: float = 1e-7):
    """The certified support entry with the largest violation at p, or None."""
    p = np.asarray(tuple(p), dtype=float)
    best = None
    for s in region.support:
        if s.certainty != CERTIFIED:
            continue
        margin = s.value - float(np.dot(s.weights, p))
        if margin > tol and (best is None or margin > best[0]):
            best = (margin, s)
    return None if best is None else best[1]


def minkowski_sum(a: KRegionApprox, b: KRegionApprox) -> KRegionApprox:
    """Region of the independent pair: inner points add pairwise, support values add per direction.

    Witness channels are dropped (they would live on the product pmf).
    """
    pts = [
        (KTriple(*(np.add(ta, tb))), None)
        for ta, _ in a.inner_points
        for tb, _ in b.inner_points
    ]
    inner = prune(pts)
    bmap = {_wkey(s.weights): s for s in b.support}
    support = []
    for s in a.support:
        t = bmap.get(_wkey(s.weights))
        if t is None:
            continue
        cert = CERTIFIED if s.certainty == t.certainty == CERTIFIED else HEURISTIC
        support.append(SupportEntry(s.weights, s.value + t.value, cert))
    return KRegionApprox(tuple(inner), tuple(support), f"({a.source})+({b.source})")


def scale(a: KRegionApprox, n: int) -> KRegionApprox:
    """n-fold Minkowski sum; equals coordinate scaling by convexity."""
    if int(n) != n or n < 1:
        raise ValueError("scale factor must be a positive integer")
    n = int(n)
    if n == 1:
        return a
    inner = tuple((KTriple(*(n * np.asarray(t))), None) for t, _ in a.inner_points)
    support = tuple(SupportEntry(s.weights, n * s.value, s.certainty) for s in a.support)
    return KRegionApprox(inner, support, f"{n}*({a.source})")


def axis_intercepts(region: KRegionApprox, off_axis_tol: float = 1e-7, cap: float = 64.0) -> tuple:
    """Least t with t*e_k in the inner approximation, for k = 1, 2, 3.

    Solved exactly as a linear program over mixtures of inner points; the
    other two coordinates may exceed zero by at most ``off_axis_tol``.
    """
    P = region.points
    n = len(P)
    out = []
    for k in range(3):
        others = [j for j in range(3) if j != k]
        res = linprog(
            P[:, k], A_ub=P[:, others].T, b_ub=[off_axis_tol] * 2,
            A_eq=np.ones((1, n)), b_eq=[1.0], bounds=[(0, None)] * n, method="highs",
        )
        if res.status != 0 or res.fun > cap:
            raise NotReached(f"no inner point reaches axis {k + 1} below {cap}")
        out.append(max(float(res.fun), 0.0))
    return tuple(out)


def _mix_min(P: np.ndarray, alphas: np.ndarray, a: np.ndarray, b: float, raise_rates: bool = False):
    """Solve min over mixtures lam of sum lam_j (alpha P_j1 + (1-alpha) P_j2)
    subject to sum lam_j a_j <= b, for every alpha at once.

    With one inequality besides the simplex, an optimal basic solution
    mixes at most two points: a feasible one, possibly moved towards an
    infeasible one until the constraint binds.  Enumerating those pairs
    solves the linear program exactly.  With ``raise_rates`` the mixture may
    also be shifted up along r1 or r2 (the region is upward closed), each
    unit lowering ``a`` by one; the extra basic solutions are single points
    raised along the cheaper axis.  Returns an (m, 2) array of optimal
    (r1, r2) pairs, or None when no mixture is feasible.
    """
    feas = a <= b
    if not feas.any() and not raise_rates:
        return None
    F = np.nonzero(feas)[0]
    N = np.nonzero(~feas)[0]
    cost = alphas[:, None] * P[None, :, 0] + (1 - alphas[:, None]) * P[None, :, 1]  # (m, n)
    # single feasible points
    cand_pts = [P[F]]
    cand_cost = [cost[:, F]]
    if len(N):
        ii, jj = np.repeat(F, len(N)), np.tile(N, len(F))
        theta = (b - a[ii]) / (a[jj] - a[ii])
        pts = (1 - theta)[:, None] * P[ii, :2] + theta[:, None] * P[jj, :2]
        cand_pts.append(np.column_stack([pts, np.zeros(len(pts))]))
        cand_cost.append((1 - theta)[None, :] * cost[:, ii] + theta[None, :] * cost[:, jj])
    pts = np.vstack(cand_pts)[:, :2]
    costs = np.hstack(cand_cost)
    if raise_rates and len(N):
        s_need = a[N] - b  # (k,)
        up1 = np.column_stack([P[N, 0] + s_need, P[N, 1]])
        up2 = np.column_stack([P[N, 0], P[N, 1] + s_need])
        c1 = cost[:, N] + alphas[:, None] * s_need[None, :]
        c2 = cost[:, N] + (1 - alphas[:, None]) * s_need[None, :]
        pts = np.vstack([pts, up1, up2])
        costs = np.hstack([costs, c1, c2])
    return pts[costs.argmin(axis=1)]


def _slice_constraint(P: np.ndarray, kind: str, level: float, base_I: float, z_tol: float):
    if kind == "RD":
        return P[:, 2], level + z_tol
    # base_I + r1 + r2 - z >= level  <=>  z - r1 - r2 <= base_I - level
    return P[:, 2] - P[:, 0] - P[:, 1], base_I - level + z_tol


def _frontier(pairs) -> tuple:
    pts = sorted({(round(float(a), 12), round(float(b), 12)) for a, b in pairs})
    out = []
    for a, b in pts:
        a, b = max(a, 0.0), max(b, 0.0)
        if out and b >= out[-1][1] - 1e-12:
            continue  # dominated by the previous point
        out.append((a, b))
    return tuple(out)


def alpha_grid(resolution: int) -> np.ndarray:
    m = max(4 * int(resolution), 40)
    a = np.linspace(0.0, 1.0, m + 1)
    a[0], a[-1] = 1e-7, 1 - 1e-7
    return a


def slice_region(region: KRegionApprox, kind: str, level: float, base_I: float,
                 resolution: int = 20, z_tol: float = 1e-9, h_xy: float | None = None) -> Slice2D:
    """Lower-left frontier of the RD or CI slice of the inner approximation.

    RD: pairs (r1, r2) of mixtures with z <= level.  CI: pairs of mixtures,
    possibly raised along r1 or r2, with base_I + r1 + r2 - z >= level; it
    is empty only above H(X,Y) when ``h_xy`` is given.  The frontier is sampled by one
    exact linear program per direction alpha in a grid of
    ``max(4*resolution, 40) + 1`` directions.
    """
    kind = kind.upper()
    if kind not in ("RD", "CI"):
        raise ValueError("kind must be 'RD' or 'CI'")
    if level < 0:
        raise ValueError("level must be non-negative")
    if kind == "CI" and h_xy is not None and level > h_xy + 1e-12:
        raise EmptySlice(f"CI level {level} exceeds H(X,Y) = {h_xy}")
    P = region.points
    a, b = _slice_constraint(P, kind, level, base_I, z_tol)
    sol = _mix_min(P, alpha_grid(resolution), a, b, raise_rates=(kind == "CI"))
    if sol is None:
        raise EmptySlice(f"{kind} slice at level {level} is empty in this approximation")
    return Slice2D(kind, float(level), _frontier(sol))


# the operation is named ``slice`` in the public API
slice = slice_region  # noqa: A001


def wyner_gap(region: KRegionApprox, base_I: float, z_tol: float = 1e-6) -> float:
    """min r1 + r2 over the RD slice at level 0, residual dependency at most z_tol."""
    P = region.points
    sol = _mix_min(P, np.array([0.5]), P[:, 2], z_tol)
    if sol is None:
        raise EmptySlice("no inner point has residual dependency within the z tolerance")
    return max(float(sol[0, 0] + sol[0, 1]), 0.0)


def wyner_ci(region: KRegionApprox, base_I: float, z_tol: float = 1e-6) -> float:
    return wyner_gap(region, base_I, z_tol) + base_I


def _softmax(v: np.ndarray, axis=-1) -> np.ndarray:
    e = np.exp(v - v.max(axis=axis, keepdims=True))
    return e / e.sum(axis=axis, keepdims=True)


def _h_rows(M: np.ndarray) -> np.ndarray:
    safe = np.where(M > 0, M, 1.0)
    return -np.sum(np.where(M > 0, M * np.log2(safe), 0.0), axis=-1)


@dataclass(frozen=True)
class WynerDirect:
    value: float  # I(XY;U) of the best feasible candidate
    residual: float  # max |p(x,y) - sum_u p(u) p(x|u) p(y|u)|
    p_u: np.ndarray
    px_u: np.ndarray
    py_u: np.ndarray


def wyner_direct(pmf: JointPMF, restarts: int = 20, seed: int = 0, n_u: int | None = None,
                 feas_tol: float = 1e-7) -> WynerDirect:
    """Wyner's common information by direct search over X - U - Y.

    U indexes product conditionals p(x|u) p(y|u) with weights p(u), so the
    Markov chain holds by construction; the marginal constraint
    sum_u p(u) p(x|u) p(y|u) = p(x,y) is imposed as equalities for SLSQP.
    The objective is I(XY;U) = H(XY) - sum_u p(u) (H(X|u) + H(Y|u)).
    """
    P = pmf.probs
    nx, ny = P.shape
    k = n_u or nx * ny
    hxy = entropy(P)
    rng = np.random.default_rng(seed)

    def unpack(v):
        pu = _softmax(v[:k])
        ax = _softmax(v[k:k + k * nx].reshape(k, nx))
        by = _softmax(v[k + k * nx:].reshape(k, ny))
        return pu, ax, by

    def joint(v):
        pu, ax, by = unpack(v)
        return np.einsum("u,ux,uy->xy", pu, ax, by)

    def obj(v):
        pu, ax, by = unpack(v)
        return hxy - float(pu @ (_h_rows(ax) + _h_rows(by)))

    cons = {"type": "eq", "fun": lambda v: (joint(v) - P).ravel()[:-1]}
    best = None
    dim = k + k * nx + k * ny
    for _ in range(restarts):
        v0 = rng.normal(scale=2.0, size=dim)
        res = minimize(obj, v0, method="SLSQP", constraints=[cons],
                       options={"maxiter": 2000, "ftol": 1e-12})
        resid = float(np.abs(joint(res.x) - P).max())
        if resid > feas_tol:
            continue
        val = obj(res.x)
        if best is None or val < best[0]:
            best = (val, resid, res.x)
    if best is None:
        raise NotReached("no restart reached a feasible Markov decomposition")
    pu, ax, by = unpack(best[2])
    return WynerDirect(max(best[0], 0.0), best[1], pu, ax, by)


def rd_from_ci_check(region: KRegionApprox, base_I: float, levels, resolution: int = 20,
                     n_ci_levels: int = 2000, h_xy: float | None = None) -> float:
    """Largest gap between RD slices computed directly and via CI frontiers.

    Via CI: for each CI level c on a grid over [0, H(X,Y)], keep frontier
    points (r1, r2) of the CI slice with c >= base_I - t + r1 + r2; their
    upward closure is the RD slice at level t.  Both sides are compared
    through their support functions over the alpha grid (for convex
    upward-closed sets this is the Hausdorff distance in the dual norm).
    """
    P = region.points
    top = h_xy if h_xy is not None else float((P[:, 0] + P[:, 1] - P[:, 2]).max() + base_I)
    c_grid = np.linspace(0.0, top, n_ci_levels + 1)
    alphas = alpha_grid(resolution)
    ci_frontiers = []
    for c in c_grid:
        try:
            fr = slice_region(region, "CI", float(c), base_I, resolution).frontier
        except EmptySlice:
            continue
        ci_frontiers.append((float(c), np.array(fr)))
    worst = 0.0
    for t in levels:
        direct = slice_region(region, "RD", float(t), base_I, resolution)
        kept = [fr[fr[:, 0] + fr[:, 1] <= c - base_I + t + 1e-9] for c, fr in ci_frontiers]
        kept = [k for k in kept if len(k)]
        if not kept:
            worst = max(worst, np.inf)
            continue
        via = np.vstack(kept)
        for a in alphas:
            d = direct.support(a)
            v = float((a * via[:, 0] + (1 - a) * via[:, 1]).min())
            worst = max(worst, abs(d - v))
    return worst


def slice_from_csv(text: str) -> tuple:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["R1", "R2"]:
        raise ValueError("slice CSV must start with the header R1,R2")
    return tuple((float(a), float(b)) for a, b in rows[1:])
