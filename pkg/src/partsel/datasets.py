"""Bundled desk-scale graphs and stand-ins for the reference SNAP graphs.

The bundled files carry a ``# directed: true|false`` header line. The two
SNAP graphs used as reference points are not redistributed; when
``PARTSEL_SNAP_DIR`` points at a directory holding the original files they
are loaded from there, otherwise a deterministic random graph with the same
vertex and edge counts stands in (enough for checks that only depend on
|V|, |E| and the mean degree).
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .graph_core import Graph, load_edge_list

SNAP_ENV = "PARTSEL_SNAP_DIR"


@dataclass(frozen=True)
class SnapReference:
    name: str
    filename: str
    num_vertices: int
    num_edges: int
    directed: bool


SNAP_REFERENCES = {
    "ego-facebook": SnapReference("ego-facebook", "facebook_combined.txt", 4039, 88234, False),
    "wiki-vote": SnapReference("wiki-vote", "wiki-Vote.txt", 7115, 103689, True),
}


def _graph_dir():
    return resources.files("partsel").joinpath("data", "graphs")


def bundled_graphs() -> list[str]:
    return sorted(p.name[:-4] for p in _graph_dir().iterdir() if p.name.endswith(".txt"))


def bundled_path(name: str) -> str:
    p = _graph_dir().joinpath(f"{name}.txt")
    if not p.is_file():
        raise KeyError(f"no bundled graph {name!r}; available: {', '.join(bundled_graphs())}")
    return os.fspath(p)


def read_direction(path) -> bool | None:
    """Direction flag from a ``# directed: ...`` header line, if present."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            body = line[1:].strip().lower()
            if body.startswith("directed:"):
                return body.split(":", 1)[1].strip() in ("true", "1", "yes")
    return None


def load_bundled(name: str) -> Graph:
    path = bundled_path(name)
    return load_edge_list(path, directed=bool(read_direction(path)), name=name)


def standin_edges(num_vertices: int, num_edges: int, directed: bool, seed: int = 0) -> np.ndarray:
    """Random simple graph on ids 0..n-1 with exactly the given counts and no isolated vertex."""
    n, m = num_vertices, num_edges
    max_m = n * (n - 1) if directed else n * (n - 1) // 2
    if m < (n + 1) // 2 or m > max_m:
        raise ValueError("edge count incompatible with vertex count")
    rng = np.random.Generator(np.random.Philox(key=[seed, n]))
    perm = rng.permutation(n)
    # pair up vertices so that every id is covered
    first = [(int(perm[i]), int(perm[i + 1])) for i in range(0, n - 1, 2)]
    if n % 2:
        first.append((int(perm[-1]), int(perm[0])))
    seen = set()
    out = []

    def push(u, v):
        key = (u, v) if directed else (min(u, v), max(u, v))
        if u != v and key not in seen:
            seen.add(key)
            out.append(key)

    for u, v in first:
        push(u, v)
    while len(out) < m:
        batch = rng.integers(0, n, size=(2 * (m - len(out)) + 16, 2))
        for u, v in batch.tolist():
            push(u, v)
            if len(out) == m:
                break
    return np.array(sorted(out), dtype=np.int64)


def snap_graph(name: str, allow_standin: bool = True) -> tuple[Graph, bool]:
    """(graph, is_real) for a reference SNAP graph."""
    ref = SNAP_REFERENCES[name]
    root = os.environ.get(SNAP_ENV)
    if root:
        path = os.path.join(root, ref.filename)
        if os.path.isfile(path):
            return load_edge_list(path, directed=ref.directed, name=name), True
    if not allow_standin:
        raise FileNotFoundError(f"{ref.filename} not found; set {SNAP_ENV}")
    edges = standin_edges(ref.num_vertices, ref.num_edges, ref.directed)
    return Graph.from_edges(edges, directed=ref.directed, name=name), False
