# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_kernels_py``.

Same algorithms, same stopping rules; each restart of ``descend_batch``
runs as a plain C loop instead of a batched numpy expression.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log2, exp2, INFINITY

cnp.import_array()

cdef double FLOOR = 1e-300
cdef int MAX_HALVINGS = 60
cdef double ETA_MAX = 1e3


cdef double _evaluate(const double[:] p, const double[:] lp, const cnp.intp_t[:] cx,
                      const cnp.intp_t[:] cy, int nx, int ny, int n, int q,
                      double[:, :] C, double l1, double l2, double l3,
                      double[:, :] A, double[:, :] B, double[:] m,
                      double[:, :] G) noexcept nogil:
    cdef int i, k, x, y
    cdef double s = l1 + l2 + l3
    cdef double V = 0.0, t, lc, v
    for x in range(nx):
        for k in range(q):
            A[x, k] = 0.0
    for y in range(ny):
        for k in range(q):
            B[y, k] = 0.0
    for k in range(q):
        m[k] = 0.0
    for i in range(n):
        for k in range(q):
            t = p[i] * C[i, k]
            A[cx[i], k] += t
            B[cy[i], k] += t
            m[k] += t
            lc = log2(C[i, k])
            V += s * t * (lp[i] + lc)
            G[i, k] = s * lc
    for x in range(nx):
        for k in range(q):
            v = A[x, k]
            A[x, k] = log2(v)
            V -= (l1 + l3) * v * A[x, k]
    for y in range(ny):
        for k in range(q):
            v = B[y, k]
            B[y, k] = log2(v)
            V -= (l2 + l3) * v * B[y, k]
    for k in range(q):
        v = m[k]
        m[k] = log2(v)
        V += l3 * v * m[k]
    for i in range(n):
        for k in range(q):
            G[i, k] += -(l1 + l3) * A[cx[i], k] - (l2 + l3) * B[cy[i], k] + l3 * m[k]
    return V


cdef double _gap(const double[:] p, int n, int q, double[:, :] C, double[:, :] G) noexcept nogil:
    cdef int i, k
    cdef double gap = 0.0, dot, gmin
    for i in range(n):
        dot = 0.0
        gmin = INFINITY
        for k in range(q):
            dot += C[i, k] * G[i, k]
            if G[i, k] < gmin:
                gmin = G[i, k]
        gap += p[i] * (dot - gmin)
    return gap


cdef void _step(int n, int q, double[:, :] C, double[:, :] G, double eta,
                double[:, :] out) noexcept nogil:
    cdef int i, k
    cdef double gmin, tot, v
    for i in range(n):
        gmin = INFINITY
        for k in range(q):
            if G[i, k] < gmin:
                gmin = G[i, k]
        tot = 0.0
        for k in range(q):
            v = C[i, k] * exp2(-eta * (G[i, k] - gmin))
            out[i, k] = v
            tot += v
        for k in range(q):
            v = out[i, k] / tot
            out[i, k] = v if v > FLOOR else FLOOR


def descend_batch(p, cx, cy, int nx, int ny, C0, lam, int max_iters, double tol):
    cdef double[:] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef double[:] lp = np.log2(np.asarray(pv))
    cdef cnp.intp_t[:] cxv = np.ascontiguousarray(cx, dtype=np.intp)
    cdef cnp.intp_t[:] cyv = np.ascontiguousarray(cy, dtype=np.intp)
    Carr = np.maximum(np.array(C0, dtype=np.float64), FLOOR)
    Carr /= Carr.sum(axis=2, keepdims=True)
    cdef double[:, :, :] Call = Carr
    cdef int R = Carr.shape[0], n = Carr.shape[1], q = Carr.shape[2]
    cdef double l1 = lam[0], l2 = lam[1], l3 = lam[2]
    Varr = np.zeros(R)
    itarr = np.zeros(R, dtype=np.int64)
    gaparr = np.full(R, np.inf)
    convarr = np.zeros(R, dtype=bool)
    cdef double[:] Vout = Varr
    cdef long long[:] itout = itarr
    cdef double[:] gapout = gaparr
    cdef double[:, :] A = np.zeros((nx, q))
    cdef double[:, :] B = np.zeros((ny, q))
    cdef double[:] m = np.zeros(q)
    cdef double[:, :] G = np.zeros((n, q))
    cdef double[:, :] Gn = np.zeros((n, q))
    cdef double[:, :] Cn = np.zeros((n, q))
    cdef double[:, :] C
    cdef double V, Vn, eta, gap
    cdef int r, it, h, i, k, accepted, conv
    for r in range(R):
        C = Call[r]
        V = _evaluate(pv, lp, cxv, cyv, nx, ny, n, q, C, l1, l2, l3, A, B, m, G)
        eta = 1.0
        gap = INFINITY
        conv = 0
        it = 0
        with nogil:
            while it < max_iters:
                gap = _gap(pv, n, q, C, G)
                if gap <= tol:
                    conv = 1
                    break
                it += 1
                accepted = 0
                for h in range(MAX_HALVINGS):
                    _step(n, q, C, G, eta, Cn)
                    Vn = _evaluate(pv, lp, cxv, cyv, nx, ny, n, q, Cn, l1, l2, l3, A, B, m, Gn)
                    if Vn <= V:
                        for i in range(n):
                            for k in range(q):
                                C[i, k] = Cn[i, k]
                                G[i, k] = Gn[i, k]
                        V = Vn
                        eta = eta * 2.0
                        if eta > ETA_MAX:
                            eta = ETA_MAX
                        accepted = 1
                        break
                    eta = eta * 0.5
                if not accepted:
                    break
            if not conv and it >= max_iters:
                gap = _gap(pv, n, q, C, G)
                if gap <= tol:
                    conv = 1
        Vout[r] = V
        itout[r] = it
        gapout[r] = gap
        convarr[r] = bool(conv)
    return Carr, Varr, itarr, gaparr, convarr


cdef inline double _nplogp(double x) noexcept nogil:
    if x > 0.0:
        return -x * log2(x)
    return 0.0


def grid_search(p, cx, cy, int nx, int ny, int q, int g, W):
    from ._kernels_py import compositions, sorted_compositions
    cdef double[:] pv = np.ascontiguousarray(p, dtype=np.float64)
    cdef cnp.intp_t[:] cxv = np.ascontiguousarray(cx, dtype=np.intp)
    cdef cnp.intp_t[:] cyv = np.ascontiguousarray(cy, dtype=np.intp)
    Warr = np.atleast_2d(np.asarray(W, dtype=np.float64))
    cdef double[:, :] Wv = Warr
    cdef int n = pv.shape[0], K = Warr.shape[0]
    comps = compositions(g, q)
    cdef double[:, :] frac = comps / float(g)
    cdef cnp.intp_t[:] first = sorted_compositions(comps).astype(np.intp)
    cdef int P = comps.shape[0], nfirst = first.shape[0]
    cells = np.asarray(pv)[:, None, None] * (comps / float(g))[None, :, :]
    cdef double[:, :] rowent = -np.sum(
        np.where(cells > 0, cells * np.log2(np.where(cells > 0, cells, 1.0)), 0.0), axis=2
    )
    best_arr = np.full(K, np.inf)
    best_idx_arr = np.zeros((K, n), dtype=np.int64)
    cdef double[:] best = best_arr
    cdef long long[:, :] best_idx = best_idx_arr
    cdef cnp.intp_t[:] idx = np.zeros(n, dtype=np.intp)
    cdef double[:, :] A = np.zeros((nx, q))
    cdef double[:, :] B = np.zeros((ny, q))
    cdef double[:] ax = Warr[:, 0] + Warr[:, 2]
    cdef double[:] by = Warr[:, 1] + Warr[:, 2]
    cdef double[:] s = Warr.sum(axis=1)
    cdef double hxq, hyq, hq, hxyq, mk, v, t
    cdef int i, j, k, x, y, w, pos
    cdef long long total, c, c2
    total = nfirst
    for i in range(1, n):
        total *= P
    with nogil:
        for c in range(total):
            # odometer with the last row fastest; row 0 ranges over sorted compositions
            c2 = c
            for i in range(n - 1, 0, -1):
                idx[i] = c2 % P
                c2 = c2 // P
            idx[0] = first[c2]
            for x in range(nx):
                for k in range(q):
                    A[x, k] = 0.0
            for y in range(ny):
                for k in range(q):
                    B[y, k] = 0.0
            hxyq = 0.0
            for i in range(n):
                j = idx[i]
                hxyq += rowent[i, j]
                for k in range(q):
                    t = pv[i] * frac[j, k]
                    A[cxv[i], k] += t
                    B[cyv[i], k] += t
            hxq = 0.0
            hyq = 0.0
            hq = 0.0
            for k in range(q):
                mk = 0.0
                for x in range(nx):
                    hxq += _nplogp(A[x, k])
                    mk += A[x, k]
                for y in range(ny):
                    hyq += _nplogp(B[y, k])
                hq += _nplogp(mk)
            for w in range(K):
                v = ax[w] * hxq + by[w] * hyq - s[w] * hxyq - Wv[w, 2] * hq
                if v < best[w]:
                    best[w] = v
                    for i in range(n):
                        best_idx[w, i] = idx[i]
    return best_arr, best_idx_arr
