"""Immutable edge-list graphs with forward and inverted sorted orders.

Edges are kept in two sorted numpy arrays: by (src, dst) and by (dst, src).
Each order has an offset table indexed by the dense position of a vertex id
in the sorted vertex array, so a vertex's block is found with one
``searchsorted`` followed by an O(1) slice.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Iterable, Literal

import numpy as np

DegreeMode = Literal["in", "out", "both"]


class GraphError(Exception):
    """Base class for graph loading and query errors."""


class EdgeListParseError(GraphError):
    def __init__(self, path: str, lineno: int, line: str):
        super().__init__(f"{path}:{lineno}: cannot parse edge line {line.strip()!r}")
        self.path = path
        self.lineno = lineno


class EmptyGraphError(GraphError):
    pass


class VertexNotFoundError(GraphError, KeyError):
    def __init__(self, v):
        super().__init__(f"vertex {v} is not in the graph")
        self.vertex = v

    def __str__(self):
        return self.args[0]


@dataclass(frozen=True, eq=False)
class Graph:
    """Sorted edge-list graph.

    ``src``/``dst`` hold the edges sorted by (src, dst); ``inv_src``/``inv_dst``
    hold the same edges sorted by (dst, src) where ``inv_dst`` is the sort key.
    ``fwd_perm[i]`` is the forward index of inverted edge ``i``.
    """

    vertices: np.ndarray
    src: np.ndarray
    dst: np.ndarray
    inv_src: np.ndarray
    inv_dst: np.ndarray
    fwd_perm: np.ndarray
    out_offsets: np.ndarray
    in_offsets: np.ndarray
    directed: bool
    name: str = ""
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # construction -------------------------------------------------------

    @classmethod
    def from_edges(
        cls,
        edges: Iterable[tuple[int, int]] | np.ndarray,
        directed: bool = True,
        name: str = "",
        dedup: bool = False,
    ) -> "Graph":
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges, dtype=np.int64)
        if arr.size == 0:
            raise EmptyGraphError(f"graph {name!r} has no edges")
        arr = arr.reshape(-1, 2)
        if arr.min() < 0:
            raise GraphError("vertex ids must be non-negative")
        src, dst = arr[:, 0], arr[:, 1]
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        if dedup:
            keep = np.ones(len(src), dtype=bool)
            keep[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
            src, dst = src[keep], dst[keep]
        inv = np.lexsort((src, dst))
        vertices = np.unique(np.concatenate([src, dst]))
        n = len(vertices)
        s_idx = np.searchsorted(vertices, src)
        d_idx = np.searchsorted(vertices, dst[inv])
        out_offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(s_idx, minlength=n), out=out_offsets[1:])
        in_offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(d_idx, minlength=n), out=in_offsets[1:])
        return cls(
            vertices=vertices,
            src=src,
            dst=dst,
            inv_src=src[inv],
            inv_dst=dst[inv],
            fwd_perm=inv.astype(np.int64),
            out_offsets=out_offsets,
            in_offsets=in_offsets,
            directed=directed,
            name=name,
        )

    # sizes ---------------------------------------------------------------

    @property
    def num_vertices(self) -> int:
        return int(len(self.vertices))

    @property
    def num_edges(self) -> int:
        return int(len(self.src))

    def __repr__(self) -> str:
        kind = "directed" if self.directed else "undirected"
        return f"Graph({self.name!r}, |V|={self.num_vertices}, |E|={self.num_edges}, {kind})"

    # index helpers -------------------------------------------------------

    def index_of(self, v: int) -> int:
        """Dense position of vertex id ``v`` (O(log |V|))."""
        i = int(np.searchsorted(self.vertices, v))
        if i >= len(self.vertices) or self.vertices[i] != v:
            raise VertexNotFoundError(v)
        return i

    def indices(self, ids: np.ndarray) -> np.ndarray:
        """Vectorised ``index_of`` for ids known to be present."""
        return np.searchsorted(self.vertices, ids)

    def __contains__(self, v) -> bool:
        i = int(np.searchsorted(self.vertices, v))
        return i < len(self.vertices) and self.vertices[i] == v

    @property
    def src_index(self) -> np.ndarray:
        if "src_index" not in self._cache:
            self._cache["src_index"] = self.indices(self.src)
        return self._cache["src_index"]

    @property
    def dst_index(self) -> np.ndarray:
        if "dst_index" not in self._cache:
            self._cache["dst_index"] = self.indices(self.dst)
        return self._cache["dst_index"]

    def out_block(self, v: int) -> slice:
        i = self.index_of(v)
        return slice(int(self.out_offsets[i]), int(self.out_offsets[i + 1]))

    def in_block(self, v: int) -> slice:
        i = self.index_of(v)
        return slice(int(self.in_offsets[i]), int(self.in_offsets[i + 1]))

    # degree arrays -------------------------------------------------------

    def out_degrees(self) -> np.ndarray:
        """Stored out-degree per dense vertex index."""
        return np.diff(self.out_offsets)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self.in_offsets)

    def degree_array(self, mode: DegreeMode) -> np.ndarray:
        if not self.directed or mode == "both":
            return self.out_degrees() + self.in_degrees()
        return self.out_degrees() if mode == "out" else self.in_degrees()

    def transpose(self) -> "Graph":
        return Graph.from_edges(
            np.column_stack([self.dst, self.src]), directed=self.directed, name=self.name + "^T"
        )

    def remap(self) -> "Graph":
        """Copy with vertex ids compacted to 0..|V|-1 (order preserving)."""
        edges = np.column_stack([self.src_index, self.dst_index])
        return Graph.from_edges(edges, directed=self.directed, name=self.name)

    def edges(self) -> np.ndarray:
        return np.column_stack([self.src, self.dst])


def load_edge_list(
    path: str | os.PathLike,
    directed: bool = True,
    name: str | None = None,
    dedup: bool = False,
    remap: bool = False,
) -> Graph:
    """Read a SNAP-style whitespace separated ``src dst`` edge list.

    Lines starting with ``#`` and blank lines are skipped. Extra columns
    (weights, timestamps) after the first two are ignored.
    """
    path = os.fspath(path)
    pairs: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) < 2:
                raise EdgeListParseError(path, lineno, line)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(path, lineno, line) from None
            if u < 0 or v < 0:
                raise EdgeListParseError(path, lineno, line)
            pairs.append((u, v))
    if not pairs:
        raise EmptyGraphError(f"{path}: no edges found")
    if name is None:
        name = os.path.splitext(os.path.basename(path))[0]
    g = Graph.from_edges(np.array(pairs, dtype=np.int64), directed=directed, name=name, dedup=dedup)
    return g.remap() if remap else g


def out_neighbors(g: Graph, v: int) -> list[int]:
    """Out-neighbours of ``v``; for undirected graphs all neighbours, deduplicated."""
    if g.directed:
        return g.dst[g.out_block(v)].tolist()
    return _undirected_neighbors(g, v)


def in_neighbors(g: Graph, v: int) -> list[int]:
    if g.directed:
        return g.inv_src[g.in_block(v)].tolist()
    return _undirected_neighbors(g, v)


def _undirected_neighbors(g: Graph, v: int) -> list[int]:
    out = g.dst[g.out_block(v)]
    inn = g.inv_src[g.in_block(v)]
    return np.unique(np.concatenate([out, inn])).tolist()


def degree(g: Graph, v: int, mode: DegreeMode = "both") -> int:
    """Number of incident stored edges, counting parallel edges.

    For undirected graphs every mode counts all incident edges.
    """
    if mode not in ("in", "out", "both"):
        raise ValueError(f"unknown degree mode {mode!r}")
    i = g.index_of(v)
    out = int(g.out_offsets[i + 1] - g.out_offsets[i])
    inn = int(g.in_offsets[i + 1] - g.in_offsets[i])
    if not g.directed or mode == "both":
        return out + inn
    return out if mode == "out" else inn
