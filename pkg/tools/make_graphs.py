"""Regenerate the bundled desk-scale graphs in src/partsel/data/graphs.

Needs networkx (not a runtime dependency). Output is deterministic for a
given networkx version; the files are committed so this only needs to be
rerun when the corpus changes.
"""
from __future__ import annotations

import argparse
import os
import random

import networkx as nx

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "partsel", "data", "graphs")


def _orient(g, seed):
    """Directed copy of an undirected graph with random edge orientation."""
    rnd = random.Random(seed)
    d = nx.DiGraph()
    d.add_nodes_from(g)
    for u, v in sorted(g.edges()):
        d.add_edge(*((u, v) if rnd.random() < 0.5 else (v, u)))
    return d


def corpus():
    # name -> (graph, description)
    return {
        "ba-800": (nx.barabasi_albert_graph(800, 4, seed=11), "preferential attachment, m=4"),
        "er-600": (nx.gnm_random_graph(600, 3000, seed=12), "uniform random G(n, m)"),
        "ws-700": (nx.watts_strogatz_graph(700, 8, 0.1, seed=13), "small world ring, k=8, p=0.1"),
        "plc-900": (nx.powerlaw_cluster_graph(900, 3, 0.3, seed=14), "power law with clustering"),
        "sbm-640": (nx.stochastic_block_model([160] * 4, [[0.06 if i == j else 0.002 for j in range(4)]
                                                          for i in range(4)], seed=15), "four communities"),
        "geo-500": (nx.random_geometric_graph(500, 0.08, seed=16), "random geometric, r=0.08"),
        "grid-576": (nx.grid_2d_graph(24, 24), "24x24 lattice"),
        "dba-1000": (nx.dual_barabasi_albert_graph(1000, 1, 8, 0.7, seed=17), "dual preferential attachment"),
        "sf-d-700": (nx.scale_free_graph(700, seed=18), "directed scale-free multigraph"),
        "gnm-d-600": (nx.gnm_random_graph(600, 4000, seed=19, directed=True), "directed uniform random"),
        "ba-d-800": (_orient(nx.barabasi_albert_graph(800, 5, seed=20), 20), "oriented preferential attachment"),
        "kout-d-500": (nx.random_k_out_graph(500, 6, 0.3, self_loops=False, seed=21), "directed k-out, k=6"),
    }


def write(name, g, desc, out_dir):
    g = nx.convert_node_labels_to_integers(g, ordering="sorted")
    directed = g.is_directed()
    if g.is_multigraph():
        edges = sorted((u, v) for u, v, _ in g.edges(keys=True))
    else:
        edges = sorted(g.edges())
    path = os.path.join(out_dir, f"{name}.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# {name}: {desc}\n")
        fh.write(f"# directed: {'true' if directed else 'false'}\n")
        fh.write(f"# nodes: {g.number_of_nodes()} edges: {len(edges)}\n")
        for u, v in edges:
            fh.write(f"{u}\t{v}\n")
    return path, len(edges)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=OUT)
    args = ap.parse_args(argv)
    os.makedirs(args.out, exist_ok=True)
    for name, (g, desc) in corpus().items():
        path, m = write(name, g, desc, args.out)
        print(f"{path}: {g.number_of_nodes()} vertices, {m} edges")


if __name__ == "__main__":
    main()
