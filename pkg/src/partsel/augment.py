"""Synthetic training corpus: sums over multisets of real task logs.

A multiset ``M`` of algorithms run on graph ``g`` under strategy ``p`` is
treated as one composite algorithm, so ``AF(M) = sum AF(a)`` and
``ET(M) = sum ET(g, a, p)`` over ``a`` in ``M`` (with repetition).
Sums are folded left to right in the multiset's sorted order, so results
are bit-reproducible.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .dsl_analyzer import AlgorithmFeatureVector
from .features import ALGO_FEATURES, NUM_PSIDS, DataFeatureVector, psid_one_hot

INT64_MAX = 2**63 - 1
DESK_R_MAX = 5
FULL_R_MAX = 9


class IncompleteCorpusError(ValueError):
    def __init__(self, missing: list):
        self.missing = missing
        shown = ", ".join(f"({g}, {a}, {p})" for g, a, p in missing[:10])
        more = f" and {len(missing) - 10} more" if len(missing) > 10 else ""
        super().__init__(f"missing real logs for {shown}{more}")


def crw_count(n: int, r: int, limit: int = INT64_MAX) -> int:
    """Number of size-``r`` multisets from ``n`` kinds: (n+r-1)! / (r!(n-1)!).

    Raises OverflowError when the count exceeds ``limit`` (the signed 64-bit
    range by default, i.e. what a record index can address).
    """
    if n < 1 or r < 1:
        raise ValueError("n and r must be >= 1")
    c = math.comb(n + r - 1, r)
    if c > limit:
        raise OverflowError(f"C^R({n}, {r}) = {c} exceeds {limit}")
    return c


def synthetic_count(n_algorithms: int, n_graphs: int, n_strategies: int,
                    r_min: int = 2, r_max: int = FULL_R_MAX, limit: int = INT64_MAX) -> int:
    total = sum(crw_count(n_algorithms, r, limit) for r in range(r_min, r_max + 1))
    total *= n_graphs * n_strategies
    if total > limit:
        raise OverflowError(f"corpus size {total} exceeds {limit}")
    return total


def multisets(algorithms: Iterable[str], r_min: int = 2, r_max: int = FULL_R_MAX) -> list[tuple]:
    """All multisets with ``r_min <= size <= r_max``, each sorted, in lexicographic order."""
    algs = sorted(set(algorithms))
    if r_min < 1 or r_max < r_min:
        raise ValueError("need 1 <= r_min <= r_max")
    out = []
    for r in range(r_min, r_max + 1):
        out.extend(itertools.combinations_with_replacement(algs, r))
    return sorted(out)


@dataclass(frozen=True)
class TaskRecord:
    graph: str
    algorithm: object  # str for real logs, tuple of names for synthetic ones
    psid: int
    df: DataFeatureVector
    af: AlgorithmFeatureVector
    exec_time: float

    @property
    def is_synthetic(self) -> bool:
        return isinstance(self.algorithm, tuple)

    @property
    def algorithm_tag(self) -> str:
        return "+".join(self.algorithm) if self.is_synthetic else self.algorithm

    def raw_row(self) -> np.ndarray:
        return np.array(self.df.as_row() + self.af.as_list() + psid_one_hot(self.psid))


@dataclass
class TaskTable:
    """Column-oriented set of task records sharing per-graph data features."""

    graph: list
    algorithm: list
    psid: np.ndarray
    af: np.ndarray  # (n, len(ALGO_FEATURES))
    exec_time: np.ndarray
    dfs: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.graph)

    def record(self, i: int) -> TaskRecord:
        return TaskRecord(self.graph[i], self.algorithm[i], int(self.psid[i]), self.dfs[self.graph[i]],
                          AlgorithmFeatureVector(self.af[i]), float(self.exec_time[i]))

    def __iter__(self) -> Iterator[TaskRecord]:
        return (self.record(i) for i in range(len(self)))

    def raw_matrix(self) -> np.ndarray:
        """Unscaled encoded rows (see features.ENCODED_FIELDS)."""
        names = sorted(self.dfs)
        dfm = np.array([self.dfs[n].as_row() for n in names])
        gi = np.searchsorted(np.array(names), np.array(self.graph))
        onehot = np.zeros((len(self), NUM_PSIDS))
        onehot[np.arange(len(self)), self.psid] = 1.0
        return np.hstack([dfm[gi], self.af, onehot])

    @classmethod
    def from_records(cls, records: Sequence[TaskRecord]) -> "TaskTable":
        dfs = {}
        for r in records:
            dfs.setdefault(r.graph, r.df)
        af = np.array([r.af.as_list() for r in records]).reshape(len(records), len(ALGO_FEATURES))
        return cls([r.graph for r in records], [r.algorithm for r in records],
                   np.array([r.psid for r in records], dtype=np.int64), af,
                   np.array([r.exec_time for r in records], dtype=np.float64), dfs)


def augment(real_logs: Sequence[TaskRecord], algorithms: Iterable[str] | None = None,
            r_min: int = 2, r_max: int = FULL_R_MAX) -> TaskTable:
    """Synthetic records for every (graph, multiset, psid), sorted in that order.

    Real records are never copied into the output: a multiset of size 1 is
    rejected through ``r_min >= 2``.
    """
    if r_min < 2:
        raise ValueError("r_min must be >= 2 so that no real record is reproduced")
    if algorithms is None:
        algorithms = {r.algorithm for r in real_logs}
    algs = sorted(set(algorithms))
    graphs = sorted({r.graph for r in real_logs})
    psids = sorted({r.psid for r in real_logs})
    index = {}
    dfs = {}
    for r in real_logs:
        key = (r.graph, r.algorithm, r.psid)
        if key in index:
            raise ValueError(f"duplicate real log for {key}")
        index[key] = r
        dfs.setdefault(r.graph, r.df)
    missing = [(g, a, p) for g in graphs for a in algs for p in psids if (g, a, p) not in index]
    if missing:
        raise IncompleteCorpusError(missing)

    ms = multisets(algs, r_min, r_max)
    synthetic_count(len(algs), len(graphs), len(psids), r_min, r_max)  # overflow check
    a_pos = {a: k for k, a in enumerate(algs)}
    # per (graph, psid): AF and ET of each algorithm
    AF = np.array([[[index[(g, a, p)].af.as_list() for a in algs] for p in psids] for g in graphs])
    ET = np.array([[[index[(g, a, p)].exec_time for a in algs] for p in psids] for g in graphs])

    by_size: dict[int, list[int]] = {}
    for k, m in enumerate(ms):
        by_size.setdefault(len(m), []).append(k)
    n_ms = len(ms)
    af_ms = np.zeros((len(graphs), len(psids), n_ms, len(ALGO_FEATURES)))
    et_ms = np.zeros((len(graphs), len(psids), n_ms))
    for r, ks in by_size.items():
        idx = np.array([[a_pos[a] for a in ms[k]] for k in ks])  # (len(ks), r)
        acc_af = AF[:, :, idx[:, 0], :]
        acc_et = ET[:, :, idx[:, 0]]
        for j in range(1, r):
            acc_af = acc_af + AF[:, :, idx[:, j], :]
            acc_et = acc_et + ET[:, :, idx[:, j]]
        af_ms[:, :, ks, :] = acc_af
        et_ms[:, :, ks] = acc_et

    # order rows by (graph, multiset, psid)
    af_out = af_ms.transpose(0, 2, 1, 3).reshape(-1, len(ALGO_FEATURES))
    et_out = et_ms.transpose(0, 2, 1).reshape(-1)
    n_p = len(psids)
    graph_col = [g for g in graphs for _ in range(n_ms * n_p)]
    alg_col = [m for _ in graphs for m in ms for _ in range(n_p)]
    psid_col = np.tile(np.array(psids, dtype=np.int64), len(graphs) * n_ms)
    return TaskTable(graph_col, alg_col, psid_col, np.ascontiguousarray(af_out), et_out, dfs)
