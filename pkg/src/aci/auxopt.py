"""Achievable triples by scalarised minimisation over auxiliary channels.

``minimize_scalarized`` searches all channels p(q|x,y) with a given
alphabet size by multiplicative (mirror) descent from seeded Dirichlet
restarts; ``enumerate_deterministic`` and ``grid_oracle`` are independent
brute-force checks of it.
"""
from __future__ import annotations

import logging
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .envelope import envelope_bounds
from .gkops import axis_witnesses
from .errors import ShapeMismatch, TooLarge, TooManyCells
from .probdist import AuxChannel, JointPMF, KTriple, entropy, info_summary, triple_of

log = logging.getLogger(__name__)

TIE_TOL = 1e-9


class NonConvergenceWarning(RuntimeWarning):
    """No restart met the first-order tolerance; the best value is still returned."""


@dataclass(frozen=True)
class ScalarWeights:
    l1: float
    l2: float
    l3: float

    def __post_init__(self):
        vals = (self.l1, self.l2, self.l3)
        if min(vals) < 0:
            raise ValueError(f"weights must be non-negative, got {vals}")
        if abs(sum(vals) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(vals)!r}")

    @classmethod
    def normalized(cls, l1: float, l2: float, l3: float) -> "ScalarWeights":
        tot = float(l1) + float(l2) + float(l3)
        if tot <= 0:
            raise ValueError("at least one weight must be positive")
        a, b = l1 / tot, l2 / tot
        return cls(a, b, max(1.0 - a - b, 0.0))

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.l1, self.l2, self.l3)

    def dot(self, t) -> float:
        return self.l1 * t[0] + self.l2 * t[1] + self.l3 * t[2]


@dataclass
class OptOptions:
    q_size: int | None = None
    restarts: int = 32
    max_iters: int = 5000
    tolerance: float = 1e-9
    seed: int = 0
    # posterior-merge thresholds tried when polishing the best restart
    merge_tols: tuple = (1e-4, 1e-3, 1e-2, 5e-2)
    allow_large_q: bool = False


@dataclass(frozen=True)
class OptResult:
    weights: ScalarWeights
    value: float
    witness: AuxChannel
    triple: KTriple
    iterations: int
    restarts_used: int
    converged: bool = True
    gap: float = 0.0  # smallest first-order gap reached by any descent run


@dataclass(frozen=True)
class GridOracleResult:
    grid_min: float
    lower: float
    witness: AuxChannel
    q_size: int
    grid_g: int

    @property
    def slack(self) -> float:
        return self.grid_min - self.lower

    @property
    def bracket(self) -> tuple[float, float]:
        return (self.lower, self.grid_min)


def _constant(pmf: JointPMF, w: ScalarWeights) -> float:
    s = info_summary(pmf)
    return w.l1 * (s.H_XY - s.H_X) + w.l2 * (s.H_XY - s.H_Y)


def scalarized_value(pmf: JointPMF, ch: AuxChannel, w: ScalarWeights) -> float:
    if ch.rows.shape[0] != pmf.n_cells:
        raise ShapeMismatch("channel does not match the pmf support")
    return w.dot(triple_of(pmf, ch))


def _merge_columns(p: np.ndarray, C: np.ndarray, tol: float) -> np.ndarray:
    """Merge Q symbols whose posteriors p(x,y|q) lie within ``tol`` (L1)."""
    T = p[:, None] * C
    m = T.sum(axis=0)
    live = np.nonzero(m > 1e-12)[0]
    post = T[:, live] / m[live]
    groups: list[list[int]] = []
    for j in np.argsort(-m[live], kind="stable"):
        for grp in groups:
            if np.abs(post[:, j] - post[:, grp[0]]).sum() <= tol:
                grp.append(j)
                break
        else:
            groups.append([j])
    out = np.zeros_like(C)
    for k, grp in enumerate(groups):
        out[:, k] = C[:, live[grp]].sum(axis=1)
    out /= out.sum(axis=1, keepdims=True)
    return out


def _clean(C: np.ndarray, thresh: float = 1e-12) -> np.ndarray:
    out = np.where(C < thresh, 0.0, C)
    return out / out.sum(axis=1, keepdims=True)


def _anchor_channels(pmf: JointPMF, q: int) -> list[AuxChannel]:
    out = [AuxChannel.constant(pmf, q)]
    for ch in axis_witnesses(pmf):
        if ch.q_size <= q:
            out.append(AuxChannel.deterministic(ch.rows.argmax(axis=1), q))
    if pmf.n_cells <= q:
        out.append(AuxChannel.deterministic(np.arange(pmf.n_cells), q))
    return out


def _entropy_q(p: np.ndarray, C: np.ndarray) -> float:
    return entropy(p @ C)


def _minimize(pmf: JointPMF, w: ScalarWeights, opts: OptOptions, rng: np.random.Generator) -> OptResult:
    p = pmf.cell_probs()
    cx, cy = pmf.support()
    nx, ny = pmf.shape
    n = len(p)
    q = opts.q_size or pmf.default_q_size()
    if q > pmf.default_q_size() and not opts.allow_large_q:
        raise ValueError(f"q_size {q} exceeds |X||Y|+2 = {pmf.default_q_size()}; set allow_large_q")
    lam = w.as_tuple()
    C0 = rng.dirichlet(np.ones(q), size=(opts.restarts, n))
    C, V, iters, gap, conv = kernels.descend_batch(p, cx, cy, nx, ny, C0, lam, opts.max_iters, opts.tolerance)
    order = np.argsort(V, kind="stable")
    candidates = [(C[r], bool(conv[r]), float(gap[r]), int(iters[r])) for r in order[:2]]
    # polish: merge near-identical posteriors of the leading restarts and descend again
    for base, _, _, it0 in list(candidates):
        for tol in opts.merge_tols:
            merged = _merge_columns(p, base, tol)
            Cm, _, itm, gm, cm = kernels.descend_batch(
                p, cx, cy, nx, ny, merged[None], lam, opts.max_iters, opts.tolerance
            )
            candidates.append((Cm[0], bool(cm[0]), float(gm[0]), it0 + int(itm[0])))
    # exact deterministic channels compete too: they are the optimum on
    # flat faces (constant Q for l3 = 0) and make the witness reproducible
    for ch in _anchor_channels(pmf, q):
        candidates.append((ch.rows, True, 0.0, 0))
    best = None
    for Cc, cv, gp, it in candidates:
        for cand in (Cc, _clean(Cc)):
            ch = AuxChannel(q, cand)
            tr = triple_of(pmf, ch)
            val = w.dot(tr)
            hq = _entropy_q(p, cand)
            key = (val, hq)
            if best is None or val < best[0][0] - TIE_TOL or (
                abs(val - best[0][0]) <= TIE_TOL and hq < best[0][1]
            ):
                best = (key, ch, tr, cv, gp, it)
    (val, _), ch, tr, _, _, it = best
    # the gap is only meaningful for interior channels, so report the
    # best one reached by descent rather than that of a boundary witness
    polished = [kernels.stationarity_gap(p, cx, cy, nx, ny, c[0], lam) for c in candidates[2:2 + 2 * len(opts.merge_tols)]]
    gp = min([float(gap.min())] + polished)
    any_conv = bool(conv.any()) or gp <= opts.tolerance
    if not any_conv:
        warnings.warn(
            f"no restart reached first-order tolerance {opts.tolerance:g} for weights {lam}"
            f" (best gap {gp:.3g})",
            NonConvergenceWarning,
            stacklevel=3,
        )
    return OptResult(w, val, ch, tr, it, opts.restarts, any_conv, gp)


def minimize_scalarized(pmf: JointPMF, w: ScalarWeights, opts: OptOptions | None = None) -> OptResult:
    """Best local minimum over restarts of l1*r1 + l2*r2 + l3*z.

    Deterministic given ``opts.seed``.  The returned value is recomputed
    from the witness channel, so ``value == w . triple`` exactly.
    """
    opts = opts or OptOptions()
    return _minimize(pmf, w, opts, np.random.default_rng(opts.seed))


def weight_grid(g: int) -> list[ScalarWeights]:
    """All (i/g, j/g, k/g) with i+j+k = g, in lexicographic order."""
    if g < 1:
        raise ValueError("grid resolution must be positive")
    out = []
    for i in range(g + 1):
        for j in range(g + 1 - i):
            k = g - i - j
            out.append(ScalarWeights(i / g, j / g, 1.0 - i / g - j / g if k else 0.0))
    return out


def _sweep_one(args):
    pmf, w, opts, key = args
    rng = np.random.default_rng(np.random.SeedSequence([opts.seed, *key]))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonConvergenceWarning)
        return _minimize(pmf, w, opts, rng)


def sweep_weights(pmf: JointPMF, weights, opts: OptOptions | None = None,
                  workers: int | None = None) -> list[OptResult]:
    """Minimise along each weight vector; the RNG stream of a direction
    depends only on the seed and the direction, so results do not depend
    on the evaluation order or on ``workers``."""
    opts = opts or OptOptions()
    jobs = []
    for w in weights:
        key = tuple(int(round(v * 2**20)) for v in w.as_tuple())
        jobs.append((pmf, w, opts, key))
    if workers and workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            results = list(ex.map(_sweep_one, jobs))
    else:
        results = [_sweep_one(j) for j in jobs]
    n_bad = sum(not r.converged for r in results)
    if n_bad:
        log.info("%d of %d directions did not meet the first-order tolerance", n_bad, len(results))
    return results


def sweep(pmf: JointPMF, weight_grid_resolution: int = 20, opts: OptOptions | None = None,
          workers: int | None = None) -> list[OptResult]:
    if weight_grid_resolution < 4:
        raise ValueError("sweep resolution must be at least 4")
    return sweep_weights(pmf, weight_grid(weight_grid_resolution), opts, workers)


REFINE_L3 = (0.9, 0.97, 0.99, 0.997)


def refinement_weights(g: int, l3_values=REFINE_L3) -> list[ScalarWeights]:
    """Directions concentrated near the z axis, where slices at small
    residual dependency are decided: l3 fixed, (l1, l2) split in g steps."""
    out = []
    for l3 in l3_values:
        for i in range(g + 1):
            a = (1.0 - l3) * i / g
            out.append(ScalarWeights(a, 1.0 - l3 - a, l3))
    return out


AXIS_EPS = (0.02, 0.01)


def axis_weights(eps_values=AXIS_EPS) -> list[ScalarWeights]:
    """Directions with one small weight and the other two equal.  For small
    enough eps the minimum divided by eps is the axis intercept, which
    lets support constraints reproduce the axis (monotone) bounds."""
    out = []
    for eps in eps_values:
        rest = (1.0 - eps) / 2
        out += [ScalarWeights(eps, rest, rest), ScalarWeights(rest, eps, rest), ScalarWeights(rest, rest, eps)]
    return out


def refine_sweep(pmf: JointPMF, g: int = 20, opts: OptOptions | None = None,
                 workers: int | None = None, l3_values=REFINE_L3) -> list[OptResult]:
    """Extra directions beyond the uniform grid: near-z-axis splits and axis-adjacent ones."""
    return sweep_weights(pmf, refinement_weights(g, l3_values) + axis_weights(), opts, workers)


# --- brute-force oracles ----------------------------------------------------

MAX_ENUM_CELLS = 12


def _set_partitions(n: int, max_classes: int):
    """Restricted growth strings of length n with at most max_classes blocks."""
    a = [0] * n

    def rec(i, k):
        if i == n:
            yield tuple(a)
            return
        for v in range(min(k + 1, max_classes)):
            a[i] = v
            yield from rec(i + 1, max(k, v + 1))

    if n == 0:
        yield ()
        return
    yield from rec(1, 1)


def enumerate_deterministic(pmf: JointPMF, max_classes: int) -> list[tuple[KTriple, AuxChannel]]:
    """Exact triples of every Q = f(x, y), one per set partition of the support."""
    n = pmf.n_cells
    if n > MAX_ENUM_CELLS:
        raise TooManyCells(f"{n} support cells; deterministic enumeration allows at most {MAX_ENUM_CELLS}")
    out = []
    for labels in _set_partitions(n, max(1, max_classes)):
        ch = AuxChannel.deterministic(labels)
        out.append((triple_of(pmf, ch), ch))
    return out


MAX_GRID_CELLS = 4


def grid_oracle(pmf: JointPMF, w, q_size: int = 4, grid_g: int = 12,
                certify: bool = True) -> GridOracleResult:
    """Exhaustive minimum over channels with entries in {0, 1/g, ..., 1}.

    ``w`` is one ScalarWeights or a sequence of them (one enumeration
    serves all).  The upper end of the bracket is the grid minimum, an
    achievable value; the lower end is a certified lower bound on the
    minimum over all auxiliary variables (see :mod:`aci.envelope`).
    """
    many = not isinstance(w, ScalarWeights)
    ws = list(w) if many else [w]
    n = pmf.n_cells
    if n > MAX_GRID_CELLS:
        raise TooLarge(f"grid oracle handles at most {MAX_GRID_CELLS} support cells, pmf has {n}")
    p = pmf.cell_probs()
    cx, cy = pmf.support()
    nx, ny = pmf.shape
    W = np.array([v.as_tuple() for v in ws])
    best, idx = kernels.grid_search(p, cx, cy, nx, ny, q_size, grid_g, W)
    comps = kernels.compositions(grid_g, q_size) / grid_g
    out = []
    for k, wk in enumerate(ws):
        ch = AuxChannel(q_size, comps[idx[k]])
        gmin = wk.dot(triple_of(pmf, ch))
        if certify:
            eb = envelope_bounds(p, cx, cy, nx, ny, wk.as_tuple())
            lower = min(eb.lower + _constant(pmf, wk), gmin)
        else:
            lower = -np.inf
        out.append(GridOracleResult(gmin, lower, ch, q_size, grid_g))
    return out if many else out[0]


def certified_support(pmf: JointPMF, w: ScalarWeights, eps: float = 1e-5) -> tuple[float, float]:
    """(certified lower bound, envelope upper value) of min over Q of w . triple."""
    if pmf.n_cells > MAX_GRID_CELLS:
        raise TooLarge(f"certification handles at most {MAX_GRID_CELLS} support cells")
    p = pmf.cell_probs()
    cx, cy = pmf.support()
    nx, ny = pmf.shape
    eb = envelope_bounds(p, cx, cy, nx, ny, w.as_tuple(), eps=eps)
    c = _constant(pmf, w)
    return eb.lower + c, eb.upper + c
