# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the loops in ``_kernels_py``.

Semantics (accumulation order, tie-breaking) must stay identical to the
pure Python versions; ``tests/test_kernels.py`` checks the two agree.
"""
import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def hdrf_assign(const cnp.int64_t[:] src_idx, const cnp.int64_t[:] dst_idx,
                Py_ssize_t num_vertices, int num_workers, double lam, double eps):
    cdef Py_ssize_t n_edges = src_idx.shape[0]
    cdef int W = num_workers
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.empty(n_edges, dtype=np.int32)
    cdef cnp.uint8_t[:, :] present = np.zeros((num_vertices, W), dtype=np.uint8)
    cdef cnp.int64_t[:] pdeg = np.zeros(num_vertices, dtype=np.int64)
    cdef cnp.int64_t[:] load = np.zeros(W, dtype=np.int64)
    cdef Py_ssize_t e, u, v
    cdef int p, best
    cdef cnp.int64_t du, dv, maxsize, minsize
    cdef double theta_u, theta_v, denom, rep, score, best_score
    for e in range(n_edges):
        u = src_idx[e]
        v = dst_idx[e]
        pdeg[u] += 1
        pdeg[v] += 1
        du = pdeg[u]
        dv = pdeg[v]
        theta_u = <double>du / <double>(du + dv)
        theta_v = 1.0 - theta_u
        maxsize = load[0]
        minsize = load[0]
        for p in range(1, W):
            if load[p] > maxsize:
                maxsize = load[p]
            if load[p] < minsize:
                minsize = load[p]
        denom = eps + <double>(maxsize - minsize)
        best = 0
        best_score = -1.0
        for p in range(W):
            rep = 0.0
            if present[u, p]:
                rep += 1.0 + (1.0 - theta_u)
            if present[v, p]:
                rep += 1.0 + (1.0 - theta_v)
            score = rep + lam * (<double>(maxsize - load[p]) / denom)
            if score > best_score:
                best_score = score
                best = p
        out[e] = best
        load[best] += 1
        present[u, best] = 1
        present[v, best] = 1
    return out


def oblivious_assign(const cnp.int64_t[:] src_idx, const cnp.int64_t[:] dst_idx,
                     Py_ssize_t num_vertices, int num_workers):
    cdef Py_ssize_t n_edges = src_idx.shape[0]
    cdef int W = num_workers
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.empty(n_edges, dtype=np.int32)
    cdef cnp.uint8_t[:, :] present = np.zeros((num_vertices, W), dtype=np.uint8)
    cdef cnp.int64_t[:] remaining = (np.bincount(np.asarray(src_idx), minlength=num_vertices)
                                     + np.bincount(np.asarray(dst_idx), minlength=num_vertices)).astype(np.int64)
    cdef cnp.int64_t[:] load = np.zeros(W, dtype=np.int64)
    cdef Py_ssize_t e, u, v, pick
    cdef int p, best, nu, nv
    for e in range(n_edges):
        u = src_idx[e]
        v = dst_idx[e]
        best = -1
        nu = 0
        nv = 0
        for p in range(W):
            nu += present[u, p]
            nv += present[v, p]
            if present[u, p] and present[v, p]:
                if best < 0 or load[p] < load[best]:
                    best = p
        if best < 0:
            if nu > 0 and nv > 0:
                pick = u if remaining[u] >= remaining[v] else v
            elif nu > 0:
                pick = u
            elif nv > 0:
                pick = v
            else:
                pick = -1
            for p in range(W):
                if pick < 0 or present[pick, p]:
                    if best < 0 or load[p] < load[best]:
                        best = p
        out[e] = best
        load[best] += 1
        remaining[u] -= 1
        remaining[v] -= 1
        present[u, best] = 1
        present[v, best] = 1
    return out


def ginger_assign(const cnp.int64_t[:] in_offsets, const cnp.int64_t[:] inv_src_idx,
                  const cnp.int64_t[:] fwd_perm, const cnp.int64_t[:] hash_worker,
                  int num_workers, double threshold, double vertex_edge_ratio):
    cdef Py_ssize_t n = in_offsets.shape[0] - 1
    cdef int W = num_workers
    cdef cnp.ndarray[cnp.int32_t, ndim=1] out = np.empty(inv_src_idx.shape[0], dtype=np.int32)
    cdef cnp.uint8_t[:, :] present = np.zeros((n, W), dtype=np.uint8)
    cdef cnp.int64_t[:] vcount = np.zeros(W, dtype=np.int64)
    cdef cnp.int64_t[:] ecount = np.zeros(W, dtype=np.int64)
    cdef cnp.int64_t[:] overlap = np.zeros(W, dtype=np.int64)
    cdef Py_ssize_t v, k, lo, hi, x
    cdef int p, best
    cdef double score, best_score
    for v in range(n):
        lo = in_offsets[v]
        hi = in_offsets[v + 1]
        if hi == lo:
            continue
        if <double>(hi - lo) > threshold:
            for k in range(lo, hi):
                p = <int>hash_worker[k]
                out[fwd_perm[k]] = p
                ecount[p] += 1
                x = inv_src_idx[k]
                if not present[x, p]:
                    present[x, p] = 1
                    vcount[p] += 1
                if not present[v, p]:
                    present[v, p] = 1
                    vcount[p] += 1
            continue
        for p in range(W):
            overlap[p] = 0
        for k in range(lo, hi):
            x = inv_src_idx[k]
            for p in range(W):
                if present[x, p]:
                    overlap[p] += 1
        best = 0
        best_score = 0.0
        for p in range(W):
            score = <double>overlap[p] - 0.5 * (<double>vcount[p] + vertex_edge_ratio * <double>ecount[p])
            if p == 0 or score > best_score:
                best_score = score
                best = p
        for k in range(lo, hi):
            out[fwd_perm[k]] = best
            x = inv_src_idx[k]
            if not present[x, best]:
                present[x, best] = 1
                vcount[best] += 1
        ecount[best] += hi - lo
        if not present[v, best]:
            present[v, best] = 1
            vcount[best] += 1
    return out


cdef inline double _thresh_l1(double G, double alpha) nogil:
    if G > alpha:
        return G - alpha
    if G < -alpha:
        return G + alpha
    return 0.0


def grow_tree(const double[:, ::1] XT, const cnp.int64_t[:, ::1] order, const double[:, ::1] xsorted,
              const double[:] g, const double[:] h, cnp.int64_t[:] node_of, const cnp.int64_t[:] features,
              double lam, double gamma, double alpha, double min_child_weight, int max_depth):
    cdef Py_ssize_t n_rows = XT.shape[1]
    cdef Py_ssize_t cap = 2 * n_rows + 1
    cdef cnp.ndarray[cnp.int32_t, ndim=1] feat = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] thr = np.zeros(cap)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] left = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] right = np.full(cap, -1, dtype=np.int32)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gainv = np.zeros(cap)
    cdef double[:] Gs = np.zeros(cap)
    cdef double[:] Hs = np.zeros(cap)
    # per-node scan state, indexed by node id
    cdef double[:] accG = np.zeros(cap)
    cdef double[:] accH = np.zeros(cap)
    cdef double[:] last = np.zeros(cap)
    cdef cnp.uint8_t[:] seen = np.zeros(cap, dtype=np.uint8)
    cdef cnp.uint8_t[:] active = np.zeros(cap, dtype=np.uint8)
    cdef double[:] best_gain = np.zeros(cap)
    cdef double[:] parent = np.zeros(cap)
    cdef cnp.int64_t[:] best_feat = np.full(cap, -1, dtype=np.int64)
    cdef double[:] best_thr = np.zeros(cap)
    cdef Py_ssize_t n_nodes = 1
    cdef Py_ssize_t r, k, fi, f, node, lid, rid, nf_lo, nf_hi, depth
    cdef Py_ssize_t n_feat = features.shape[0]
    cdef double x, GL, HL, GR, HR, Gt, Ht, tGL, tGR, tG, gain
    for r in range(n_rows):
        if node_of[r] == 0:
            Gs[0] += g[r]
            Hs[0] += h[r]
    nf_lo = 0
    nf_hi = 1
    depth = 0
    while nf_hi > nf_lo and depth < max_depth:
        for node in range(nf_lo, nf_hi):
            active[node] = 1
            best_gain[node] = 0.0
            best_feat[node] = -1
            tG = _thresh_l1(Gs[node], alpha)
            parent[node] = tG * tG / (Hs[node] + lam)
        for fi in range(n_feat):
            f = features[fi]
            for node in range(nf_lo, nf_hi):
                accG[node] = 0.0
                accH[node] = 0.0
                seen[node] = 0
            for k in range(n_rows):
                r = order[f, k]
                node = node_of[r]
                if node < 0 or not active[node]:
                    continue
                x = xsorted[f, k]
                if seen[node] and x != last[node]:
                    GL = accG[node]
                    HL = accH[node]
                    Gt = Gs[node]
                    Ht = Hs[node]
                    GR = Gt - GL
                    HR = Ht - HL
                    if HL >= min_child_weight and HR >= min_child_weight:
                        tGL = _thresh_l1(GL, alpha)
                        tGR = _thresh_l1(GR, alpha)
                        gain = tGL * tGL / (HL + lam) + tGR * tGR / (HR + lam) - parent[node] - gamma
                        if gain > best_gain[node]:
                            best_gain[node] = gain
                            best_feat[node] = f
                            best_thr[node] = x
                accG[node] += g[r]
                accH[node] += h[r]
                last[node] = x
                seen[node] = 1
        lid = n_nodes
        for node in range(nf_lo, nf_hi):
            active[node] = 0
            if best_feat[node] < 0:
                continue
            feat[node] = <int>best_feat[node]
            thr[node] = best_thr[node]
            left[node] = <int>n_nodes
            right[node] = <int>(n_nodes + 1)
            gainv[node] = best_gain[node]
            n_nodes += 2
        if n_nodes == lid:
            break
        for r in range(n_rows):
            node = node_of[r]
            if node < nf_lo or node >= nf_hi or feat[node] < 0:
                continue
            if XT[feat[node], r] < thr[node]:
                node_of[r] = left[node]
                Gs[left[node]] += g[r]
                Hs[left[node]] += h[r]
            else:
                node_of[r] = right[node]
                Gs[right[node]] += g[r]
                Hs[right[node]] += h[r]
        nf_lo = lid
        nf_hi = n_nodes
        depth += 1
    value = np.zeros(n_nodes)
    for k in range(n_nodes):
        value[k] = -_thresh_l1(Gs[k], alpha) / (Hs[k] + lam)
    return (feat[:n_nodes].copy(), thr[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value, gainv[:n_nodes].copy(), np.asarray(Hs[:n_nodes]).copy())
