"""Pure Python / numpy implementations of the hot loops.

Every function here has a twin with the same signature in ``_ckernels.pyx``.
The two are kept operation-for-operation identical (same accumulation
order, same tie-breaks) so that both backends give the same answers.
"""
from __future__ import annotations

import numpy as np

BACKEND = "python"


# streaming vertex-cut partitioners ------------------------------------------


def hdrf_assign(src_idx, dst_idx, num_vertices, num_workers, lam, eps):
    """HDRF edge placement.

    For edge (u, v) the partial degrees are bumped first, then every worker p
    is scored with ``C_rep + lam * C_bal`` where
    ``C_rep = g(u, p) + g(v, p)``, ``g(x, p) = 1 + (1 - theta_x)`` if p already
    holds x (else 0), ``theta_u = d_u / (d_u + d_v)``, and
    ``C_bal = (maxsize - |E_p|) / (eps + maxsize - minsize)``.
    """
    n_edges = len(src_idx)
    W = int(num_workers)
    out = np.empty(n_edges, dtype=np.int32)
    present = [set() for _ in range(int(num_vertices))]
    pdeg = [0] * int(num_vertices)
    load = [0] * W
    for e in range(n_edges):
        u = int(src_idx[e])
        v = int(dst_idx[e])
        pdeg[u] += 1
        pdeg[v] += 1
        du = pdeg[u]
        dv = pdeg[v]
        theta_u = du / (du + dv)
        theta_v = 1.0 - theta_u
        maxsize = max(load)
        minsize = min(load)
        denom = eps + maxsize - minsize
        au = present[u]
        av = present[v]
        best = 0
        best_score = -1.0
        for p in range(W):
            rep = 0.0
            if p in au:
                rep += 1.0 + (1.0 - theta_u)
            if p in av:
                rep += 1.0 + (1.0 - theta_v)
            score = rep + lam * ((maxsize - load[p]) / denom)
            if score > best_score:
                best_score = score
                best = p
        out[e] = best
        load[best] += 1
        au.add(best)
        av.add(best)
    return out


def _least_loaded(candidates, load):
    best = -1
    for p in candidates:
        if best < 0 or load[p] < load[best]:
            best = p
    return best


def oblivious_assign(src_idx, dst_idx, num_vertices, num_workers):
    """PowerGraph greedy ("oblivious") vertex-cut placement."""
    n_edges = len(src_idx)
    W = int(num_workers)
    n = int(num_vertices)
    out = np.empty(n_edges, dtype=np.int32)
    remaining = np.bincount(src_idx, minlength=n) + np.bincount(dst_idx, minlength=n)
    remaining = remaining.tolist()
    present = [set() for _ in range(n)]
    load = [0] * W
    for e in range(n_edges):
        u = int(src_idx[e])
        v = int(dst_idx[e])
        au = present[u]
        av = present[v]
        common = sorted(au & av)
        if common:
            best = _least_loaded(common, load)
        elif au and av:
            pick = au if remaining[u] >= remaining[v] else av
            best = _least_loaded(sorted(pick), load)
        elif au or av:
            best = _least_loaded(sorted(au or av), load)
        else:
            best = _least_loaded(range(W), load)
        out[e] = best
        load[best] += 1
        remaining[u] -= 1
        remaining[v] -= 1
        au.add(best)
        av.add(best)
    return out


def ginger_assign(in_offsets, inv_src_idx, fwd_perm, hash_worker, num_workers, threshold, vertex_edge_ratio):
    """Ginger vertex-group placement over vertices in ascending index order.

    Vertices whose in-degree exceeds ``threshold`` spread their in-edges by
    ``hash_worker`` (hash of the source); the rest move as a group to the
    worker maximising ``|N_in(v) & V_w| - 0.5 * (|V_w| + ratio * |E_w|)``.
    """
    n = len(in_offsets) - 1
    W = int(num_workers)
    out = np.empty(len(inv_src_idx), dtype=np.int32)
    present = [set() for _ in range(n)]
    vcount = [0] * W
    ecount = [0] * W

    def touch(x, p):
        s = present[x]
        if p not in s:
            s.add(p)
            vcount[p] += 1

    for v in range(n):
        lo = int(in_offsets[v])
        hi = int(in_offsets[v + 1])
        if hi == lo:
            continue
        if hi - lo > threshold:
            for k in range(lo, hi):
                p = int(hash_worker[k])
                out[fwd_perm[k]] = p
                ecount[p] += 1
                touch(int(inv_src_idx[k]), p)
                touch(v, p)
            continue
        overlap = [0] * W
        for k in range(lo, hi):
            for p in present[int(inv_src_idx[k])]:
                overlap[p] += 1
        best = 0
        best_score = 0.0
        for p in range(W):
            score = overlap[p] - 0.5 * (vcount[p] + vertex_edge_ratio * ecount[p])
            if p == 0 or score > best_score:
                best_score = score
                best = p
        for k in range(lo, hi):
            out[fwd_perm[k]] = best
            touch(int(inv_src_idx[k]), best)
        ecount[best] += hi - lo
        touch(v, best)
    return out


# regression tree growth ----------------------------------------------------


def _thresh_l1(G, alpha):
    if G > alpha:
        return G - alpha
    if G < -alpha:
        return G + alpha
    return 0.0


def grow_tree(XT, order, xsorted, g, h, node_of, features, lam, gamma, alpha, min_child_weight, max_depth):
    """Level-wise exact greedy regression tree.

    ``XT`` is the feature-major data matrix, ``order[f]`` lists row indices
    sorted by feature ``f`` and ``xsorted[f] = XT[f, order[f]]``; ``node_of[r]`` is 0
    for rows in the bootstrap sample and -1 otherwise (modified in place).
    Returns (feature, threshold, left, right, value, gain, cover) arrays.
    A row goes left when ``X[r, f] < threshold``.
    """
    feat_l = [-1]
    thr_l = [0.0]
    left_l = [-1]
    right_l = [-1]
    gain_l = [0.0]
    rows0 = np.flatnonzero(node_of == 0)
    G0 = 0.0
    H0 = 0.0
    for r in rows0:
        G0 += g[r]
        H0 += h[r]
    Gs = [G0]
    Hs = [H0]
    frontier = [0]
    depth = 0
    while frontier and depth < max_depth:
        nf = len(frontier)
        slot = {node: i for i, node in enumerate(frontier)}
        best_gain = [0.0] * nf
        best_feat = [-1] * nf
        best_thr = [0.0] * nf
        in_frontier = np.zeros(len(Gs), dtype=bool)
        in_frontier[frontier] = True
        for f in features:
            rows = order[f]
            nodes = node_of[rows]
            mask = nodes >= 0
            mask[mask] = in_frontier[nodes[mask]]
            rows = rows[mask]
            nodes = nodes[mask]
            if len(rows) == 0:
                continue
            grp = np.argsort(nodes, kind="stable")
            rows = rows[grp]
            nodes = nodes[grp]
            starts = np.flatnonzero(np.r_[True, nodes[1:] != nodes[:-1]])
            ends = np.r_[starts[1:], len(rows)]
            xcol = xsorted[f][mask][grp]
            gcol = g[rows]
            hcol = h[rows]
            for a, b in zip(starts.tolist(), ends.tolist()):
                node = int(nodes[a])
                i = slot[node]
                xs = xcol[a:b]
                if b - a < 2:
                    continue
                cg = np.cumsum(gcol[a:b])
                ch = np.cumsum(hcol[a:b])
                # candidate split before position k: left = [a, a+k)
                cand = np.flatnonzero(xs[1:] != xs[:-1]) + 1
                if len(cand) == 0:
                    continue
                GL = cg[cand - 1]
                HL = ch[cand - 1]
                Gt = Gs[node]
                Ht = Hs[node]
                GR = Gt - GL
                HR = Ht - HL
                ok = (HL >= min_child_weight) & (HR >= min_child_weight)
                if not ok.any():
                    continue
                tGL = np.sign(GL) * np.maximum(np.abs(GL) - alpha, 0.0)
                tGR = np.sign(GR) * np.maximum(np.abs(GR) - alpha, 0.0)
                tG = _thresh_l1(Gt, alpha)
                parent = tG * tG / (Ht + lam)
                gains = tGL * tGL / (HL + lam) + tGR * tGR / (HR + lam) - parent - gamma
                gains = np.where(ok, gains, -np.inf)
                k = int(np.argmax(gains))
                if gains[k] > best_gain[i]:
                    best_gain[i] = float(gains[k])
                    best_feat[i] = int(f)
                    best_thr[i] = float(xs[cand[k]])
        new_frontier = []
        for i, node in enumerate(frontier):
            if best_feat[i] < 0:
                continue
            f = best_feat[i]
            t = best_thr[i]
            lid = len(Gs)
            rid = lid + 1
            feat_l[node] = f
            thr_l[node] = t
            left_l[node] = lid
            right_l[node] = rid
            gain_l[node] = best_gain[i]
            for _ in range(2):
                feat_l.append(-1)
                thr_l.append(0.0)
                left_l.append(-1)
                right_l.append(-1)
                gain_l.append(0.0)
            members = np.flatnonzero(node_of == node)
            go_left = XT[f, members] < t
            node_of[members[go_left]] = lid
            node_of[members[~go_left]] = rid
            GL = 0.0
            HL = 0.0
            GR = 0.0
            HR = 0.0
            for r, lft in zip(members.tolist(), go_left.tolist()):
                if lft:
                    GL += g[r]
                    HL += h[r]
                else:
                    GR += g[r]
                    HR += h[r]
            Gs.extend([GL, GR])
            Hs.extend([HL, HR])
            new_frontier.extend([lid, rid])
        frontier = new_frontier
        depth += 1
    n_nodes = len(Gs)
    value = np.zeros(n_nodes)
    for k in range(n_nodes):
        value[k] = -_thresh_l1(Gs[k], alpha) / (Hs[k] + lam)
    return (
        np.array(feat_l, dtype=np.int32),
        np.array(thr_l, dtype=np.float64),
        np.array(left_l, dtype=np.int32),
        np.array(right_l, dtype=np.int32),
        value,
        np.array(gain_l, dtype=np.float64),
        np.array(Hs, dtype=np.float64),
    )
