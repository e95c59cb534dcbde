"""Brute-force reference implementations used as test oracles.

These work from the raw edge list with plain Python containers and share no
code with the package's graph index or engine.
"""
from __future__ import annotations

import itertools
from collections import defaultdict


def adjacency(edges, directed):
    out = defaultdict(list)
    inn = defaultdict(list)
    for u, v in edges:
        out[u].append(v)
        inn[v].append(u)
        if not directed:
            out[v].append(u)
            inn[u].append(v)
    return out, inn


def vertex_set(edges):
    return sorted({x for e in edges for x in e})


def undirected_sets(edges):
    nb = defaultdict(set)
    for u, v in edges:
        if u != v:
            nb[u].add(v)
            nb[v].add(u)
    return nb


def out_neighbors_scan(edges, directed, v):
    if directed:
        return sorted(b for a, b in edges if a == v)
    return sorted({b for a, b in edges if a == v} | {a for a, b in edges if b == v})


def in_neighbors_scan(edges, directed, v):
    if directed:
        return sorted(a for a, b in edges if b == v)
    return out_neighbors_scan(edges, directed, v)


def degree_scan(edges, directed, v, mode):
    out = sum(1 for a, _ in edges if a == v)
    inn = sum(1 for _, b in edges if b == v)
    if not directed or mode == "both":
        return out + inn
    return out if mode == "out" else inn


def pagerank(edges, directed, iterations=10, d=0.85):
    vs = vertex_set(edges)
    out, inn = adjacency(edges, directed)
    pr = {v: 1.0 / len(vs) for v in vs}
    for _ in range(iterations):
        pr = {v: (1 - d) + d * sum(pr[u] / len(out[u]) for u in inn[v]) for v in vs}
    return pr


def greedy_coloring(edges):
    nb = undirected_sets(edges)
    color = {}
    for v in vertex_set(edges):
        used = {color[u] for u in nb[v] if u in color}
        c = 0
        while c in used:
            c += 1
        color[v] = c
    return color


def apcn(edges):
    nb = undirected_sets(edges)
    vs = vertex_set(edges)
    out = {}
    for a, b in itertools.combinations(vs, 2):
        c = len(nb[a] & nb[b])
        if c:
            out[(a, b)] = c
    return out


def triangles(edges):
    nb = undirected_sets(edges)
    vs = vertex_set(edges)
    return sum(1 for a, b, c in itertools.combinations(vs, 3) if b in nb[a] and c in nb[a] and c in nb[b])


def clustering(edges):
    nb = undirected_sets(edges)
    out = {}
    for v in vertex_set(edges):
        k = len(nb[v])
        if k < 2:
            out[v] = 0.0
            continue
        links = sum(1 for a, b in itertools.combinations(sorted(nb[v]), 2) if b in nb[a])
        out[v] = links / (k * (k - 1))
    return out


def random_walks(edges, directed, steps, choose):
    """``choose(source, hop, n)`` returns the neighbour index to follow."""
    vs = vertex_set(edges)
    nbrs = {v: out_neighbors_scan(edges, directed, v) for v in vs}
    walks = {}
    for s in vs:
        cur = s
        path = []
        for hop in range(steps):
            opts = nbrs[cur]
            if not opts:
                break
            cur = opts[choose(s, hop, len(opts))]
            path.append(cur)
        walks[s] = tuple(path)
    return walks


def moments(seq):
    """Two-pass mean, population std, Fisher-Pearson skewness, non-excess kurtosis."""
    n = len(seq)
    mean = sum(seq) / n
    m2 = sum((x - mean) ** 2 for x in seq) / n
    m3 = sum((x - mean) ** 3 for x in seq) / n
    m4 = sum((x - mean) ** 4 for x in seq) / n
    if m2 == 0:
        return mean, 0.0, 0.0, 0.0
    return mean, m2 ** 0.5, m3 / m2 ** 1.5, m4 / m2 ** 2
