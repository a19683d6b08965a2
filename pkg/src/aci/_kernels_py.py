"""Pure-numpy implementations of the hot kernels.

These are the reference versions; ``_ckernels`` mirrors them line by line
in Cython.  Both work on the "variable part" of the scalarised objective

    V(c) = (l1+l3) H(XQ) + (l2+l3) H(YQ) - (l1+l2+l3) H(XYQ) - l3 H(Q)

for a channel ``c`` (cells x q) over the support cells of a pmf; the
weighted triple equals V plus a constant depending only on p(x,y).
"""
from __future__ import annotations

import numpy as np

FLOOR = 1e-300
MAX_HALVINGS = 60
ETA_MAX = 1e3


def _onehot(idx: np.ndarray, k: int) -> np.ndarray:
    m = np.zeros((k, len(idx)))
    m[idx, np.arange(len(idx))] = 1.0
    return m


def _evaluate(p, mx, my, cx, cy, C, lam):
    l1, l2, l3 = lam
    s = l1 + l2 + l3
    T = p[None, :, None] * C
    A = mx @ T
    B = my @ T
    m = T.sum(axis=1)
    lc = np.log2(C)
    lt = np.log2(p)[None, :, None] + lc
    la = np.log2(A)
    lb = np.log2(B)
    lm = np.log2(m)
    V = (
        -(l1 + l3) * np.sum(A * la, axis=(1, 2))
        - (l2 + l3) * np.sum(B * lb, axis=(1, 2))
        + s * np.sum(T * lt, axis=(1, 2))
        + l3 * np.sum(m * lm, axis=1)
    )
    G = s * lc - (l1 + l3) * la[:, cx, :] - (l2 + l3) * lb[:, cy, :] + l3 * lm[:, None, :]
    return V, G


def stationarity_gap(p, cx, cy, nx, ny, C, lam) -> float:
    """First-order gap of one channel (cells x q).

    Only Q symbols of positive mass compete in the minimum: the objective
    is homogeneous in the mass of a column, so an empty column offers no
    first-order descent.
    """
    p = np.asarray(p, dtype=float)
    cx = np.asarray(cx, dtype=np.intp)
    cy = np.asarray(cy, dtype=np.intp)
    C = np.maximum(np.asarray(C, dtype=float), FLOOR)
    used = p @ C > 1e-12
    _, G = _evaluate(p, _onehot(cx, nx), _onehot(cy, ny), cx, cy, C[None], tuple(float(v) for v in lam))
    G = G[0][:, used]
    return float(np.sum(p * (np.sum(C[:, used] * G, axis=1) - G.min(axis=1))))


def _step(C, G, eta):
    Gs = G - G.min(axis=2, keepdims=True)
    Cn = C * np.exp2(-eta[:, None, None] * Gs)
    Cn /= Cn.sum(axis=2, keepdims=True)
    return np.maximum(Cn, FLOOR)


def descend_batch(p, cx, cy, nx, ny, C0, lam, max_iters, tol):
    """Mirror descent on every channel in ``C0`` (restarts x cells x q).

    Each restart runs independently: multiplicative step
    c <- c * 2^(-eta * grad/p) renormalised per row, halving eta until the
    objective does not increase.  Stops when the first-order gap
    sum_i p_i (<c_i, G_i> - min_q G_iq) falls below ``tol``.

    Returns (C, V, iters, gap, converged).
    """
    p = np.asarray(p, dtype=float)
    cx = np.asarray(cx, dtype=np.intp)
    cy = np.asarray(cy, dtype=np.intp)
    lam = tuple(float(v) for v in lam)
    C = np.maximum(np.array(C0, dtype=float), FLOOR)
    C /= C.sum(axis=2, keepdims=True)
    R = C.shape[0]
    mx, my = _onehot(cx, nx), _onehot(cy, ny)
    V, G = _evaluate(p, mx, my, cx, cy, C, lam)
    eta = np.ones(R)
    iters = np.zeros(R, dtype=np.int64)
    gap = np.full(R, np.inf)
    converged = np.zeros(R, dtype=bool)
    active = np.ones(R, dtype=bool)
    for _ in range(max_iters):
        gap = np.where(
            active,
            np.sum(p[None, :] * (np.sum(C * G, axis=2) - G.min(axis=2)), axis=1),
            gap,
        )
        converged |= active & (gap <= tol)
        active &= ~converged
        if not active.any():
            break
        iters[active] += 1
        pending = active.copy()
        for _h in range(MAX_HALVINGS):
            idx = np.nonzero(pending)[0]
            if idx.size == 0:
                break
            Cn = _step(C[idx], G[idx], eta[idx])
            Vn, Gn = _evaluate(p, mx, my, cx, cy, Cn, lam)
            ok = Vn <= V[idx]
            acc = idx[ok]
            C[acc], V[acc], G[acc] = Cn[ok], Vn[ok], Gn[ok]
            eta[acc] = np.minimum(eta[acc] * 2.0, ETA_MAX)
            rej = idx[~ok]
            eta[rej] *= 0.5
            pending[acc] = False
        # restarts that could not find a non-increasing step have stalled
        active &= ~pending
    # restarts cut off by max_iters report the gap of their final iterate
    last = active & (iters >= max_iters)
    if last.any():
        gap[last] = np.sum(p[None, :] * (np.sum(C[last] * G[last], axis=2) - G[last].min(axis=2)), axis=1)
        converged |= last & (gap <= tol)
    return C, V, iters, gap, converged


# --- exhaustive channel grid ------------------------------------------------

def compositions(g: int, q: int) -> np.ndarray:
    """All length-q tuples of non-negative integers summing to g, lexicographic."""
    if q == 1:
        return np.array([[g]], dtype=np.int64)
    out = []
    for first in range(g, -1, -1):
        for rest in compositions(g - first, q - 1):
            out.append((first,) + tuple(rest))
    return np.array(out, dtype=np.int64)


def sorted_compositions(comps: np.ndarray) -> np.ndarray:
    """Indices of the non-increasing compositions (one per q-relabelling orbit)."""
    return np.nonzero(np.all(comps[:, :-1] >= comps[:, 1:], axis=1))[0]


def _neg_plogp(x):
    out = np.zeros_like(x)
    pos = x > 0
    out[pos] = -x[pos] * np.log2(x[pos])
    return out


def grid_search(p, cx, cy, nx, ny, q, g, W):
    """Minimum of V over all channels with entries in {0, 1/g, ..., 1}.

    Row 0 is restricted to non-increasing compositions, which loses
    nothing because V is invariant under relabelling q.  ``W`` is a
    (K, 3) array of weights; returns (best_V (K,), best_index (K, cells))
    where best_index holds composition indices per row.
    """
    p = np.asarray(p, dtype=float)
    cx = np.asarray(cx, dtype=np.intp)
    cy = np.asarray(cy, dtype=np.intp)
    W = np.atleast_2d(np.asarray(W, dtype=float))
    n = len(p)
    comps = compositions(g, q)
    frac = comps / g
    first = sorted_compositions(comps)
    P = len(comps)
    K = W.shape[0]
    ax = W[:, 0] + W[:, 2]
    by = W[:, 1] + W[:, 2]
    s = W.sum(axis=1)
    l3 = W[:, 2]
    # H(XYQ) is additive over rows: precompute per row and composition
    rowent = np.array([_neg_plogp(p[i] * frac).sum(axis=1) for i in range(n)])
    best = np.full(K, np.inf)
    best_idx = np.zeros((K, n), dtype=np.int64)
    # enumerate rows 0..n-2 by odometer, vectorise the last row
    lead_ranges = [first] + [np.arange(P)] * (n - 2) if n >= 2 else []
    last = np.arange(P) if n >= 2 else first
    contrib_last = p[n - 1] * frac  # (P, q)

    def lead_iter():
        if n == 1:
            yield ()
            return
        import itertools
        yield from itertools.product(*lead_ranges)

    for lead in lead_iter():
        A = np.zeros((nx, q))
        B = np.zeros((ny, q))
        e3 = 0.0
        for i, j in enumerate(lead):
            A[cx[i]] += p[i] * frac[j]
            B[cy[i]] += p[i] * frac[j]
            e3 += rowent[i, j]
        AL = np.broadcast_to(A, (len(last), nx, q)).copy()
        BL = np.broadcast_to(B, (len(last), ny, q)).copy()
        AL[:, cx[n - 1], :] += contrib_last[last]
        BL[:, cy[n - 1], :] += contrib_last[last]
        m = AL.sum(axis=1)
        hxq = _neg_plogp(AL).sum(axis=(1, 2))
        hyq = _neg_plogp(BL).sum(axis=(1, 2))
        hq = _neg_plogp(m).sum(axis=1)
        hxyq = e3 + rowent[n - 1, last]
        vals = ax[:, None] * hxq + by[:, None] * hyq - s[:, None] * hxyq - l3[:, None] * hq
        arg = vals.argmin(axis=1)
        v = vals[np.arange(K), arg]
        better = v < best
        if better.any():
            best[better] = v[better]
            for k in np.nonzero(better)[0]:
                best_idx[k, : n - 1] = lead
                best_idx[k, n - 1] = last[arg[k]]
    return best, best_idx
