"""Graph data features and the encoded model input.

The encoded row is ``[X_G ; X_A ; strategy one-hot]``; the frozen field
order is listed in ``docs/encoding.md`` and in :data:`ENCODED_FIELDS`.
Count-like fields go through ``log1p`` then min-max scaling with parameters
fitted on the training corpus; sign bits and one-hots pass through.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph_core import Graph
from .partitioners import NUM_PSIDS

ALGO_FEATURES = (
    "num_vertex", "num_edge", "num_in_degree", "num_out_degree", "num_both_degree",
    "all_vertex_list", "all_edge_list", "get_in_vertex_to", "get_out_vertex_from", "get_both_vertex_of",
    "vertex_value_read", "vertex_value_write", "edge_value_read", "edge_value_write",
    "add", "subtract", "multiply", "divide", "others_value_read", "others_value_write", "apply",
)

_MOMENT_FIELDS = ("mean", "std", "skew_abs", "skew_sign", "kurt_abs", "kurt_sign")
DATA_FEATURES = (
    ("num_vertex", "num_edge")
    + tuple(f"in_{m}" for m in _MOMENT_FIELDS)
    + tuple(f"out_{m}" for m in _MOMENT_FIELDS)
    + ("dir_directed", "dir_undirected")
)
_SCALED_DATA = {"num_vertex", "num_edge", "in_mean", "in_std", "in_skew_abs", "in_kurt_abs",
                "out_mean", "out_std", "out_skew_abs", "out_kurt_abs"}

ENCODED_FIELDS = (
    tuple(f"df.{n}" for n in DATA_FEATURES)
    + tuple(f"af.{n}" for n in ALGO_FEATURES)
    + tuple(f"psid.{k}" for k in range(NUM_PSIDS))
)
ENCODED_LENGTH = len(ENCODED_FIELDS)
SCALED_MASK = np.array(
    [n in _SCALED_DATA for n in DATA_FEATURES] + [True] * len(ALGO_FEATURES) + [False] * NUM_PSIDS
)


class InvalidStrategyError(ValueError):
    pass


@dataclass(frozen=True)
class DataFeatureVector:
    num_vertex: int
    num_edge: int
    in_mean: float
    in_std: float
    in_skew_abs: float
    in_skew_sign: int
    in_kurt_abs: float
    in_kurt_sign: int
    out_mean: float
    out_std: float
    out_skew_abs: float
    out_skew_sign: int
    out_kurt_abs: float
    out_kurt_sign: int
    directed: bool

    def moments(self, side: str) -> tuple[float, float, float, float]:
        """Signed (mean, std, skewness, kurtosis) of the in or out degree."""
        d = asdict(self)
        skew = d[f"{side}_skew_abs"] * (1 if d[f"{side}_skew_sign"] else -1)
        kurt = d[f"{side}_kurt_abs"] * (1 if d[f"{side}_kurt_sign"] else -1)
        return d[f"{side}_mean"], d[f"{side}_std"], skew, kurt

    def raw_moment(self, side: str, k: int) -> float:
        """E[d^k] rebuilt from the stored moments (k <= 4)."""
        mu, sd, skew, kurt = self.moments(side)
        var = sd * sd
        if k == 0:
            return 1.0
        if k == 1:
            return mu
        if k == 2:
            return var + mu * mu
        m3 = skew * sd ** 3
        if k == 3:
            return m3 + 3 * mu * var + mu ** 3
        if k == 4:
            m4 = kurt * var * var
            return m4 + 4 * mu * m3 + 6 * mu * mu * var + mu ** 4
        raise ValueError("raw moments are only recoverable up to order 4")

    def as_row(self) -> list[float]:
        vals = [float(getattr(self, f.name)) for f in fields(self) if f.name != "directed"]
        return vals + ([1.0, 0.0] if self.directed else [0.0, 1.0])

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: Mapping) -> "DataFeatureVector":
        return cls(**{f.name: d[f.name] for f in fields(cls)})


def _moment_fields(seq: np.ndarray) -> tuple:
    x = seq.astype(np.float64)
    mean = float(x.mean())
    c = x - mean
    m2 = float(np.mean(c * c))
    if m2 == 0.0:
        return mean, 0.0, 0.0, 0, 0.0, 0
    m3 = float(np.mean(c ** 3))
    m4 = float(np.mean(c ** 4))
    skew = m3 / m2 ** 1.5
    kurt = m4 / (m2 * m2)
    return mean, m2 ** 0.5, abs(skew), int(skew > 0), abs(kurt), int(kurt > 0)


def extract_data_features(g: Graph) -> DataFeatureVector:
    """Cardinalities and degree moments; undirected graphs use the full degree on both sides."""
    if g.num_vertices < 1:
        raise ValueError("graph has no vertices")
    ins = _moment_fields(g.degree_array("in"))
    outs = _moment_fields(g.degree_array("out"))
    return DataFeatureVector(g.num_vertices, g.num_edges, *ins, *outs, g.directed)


def cardinality_features(num_vertex: int, num_edge: int, directed: bool) -> DataFeatureVector:
    """Features known only from |V| and |E|; higher moments set to 0."""
    mean = (num_edge if directed else 2 * num_edge) / num_vertex
    return DataFeatureVector(num_vertex, num_edge, mean, 0.0, 0.0, 0, 0.0, 0,
                             mean, 0.0, 0.0, 0, 0.0, 0, directed)


@dataclass(frozen=True)
class ScalerParams:
    """Per-column min/max of ``log1p`` values over the scaled columns."""

    lo: tuple
    hi: tuple

    @classmethod
    def fit(cls, raw_rows: np.ndarray) -> "ScalerParams":
        raw_rows = np.asarray(raw_rows, dtype=np.float64)
        if raw_rows.ndim != 2 or raw_rows.shape[1] != ENCODED_LENGTH:
            raise ValueError(f"expected rows of length {ENCODED_LENGTH}")
        z = np.log1p(raw_rows[:, SCALED_MASK])
        return cls(tuple(z.min(axis=0).tolist()), tuple(z.max(axis=0).tolist()))

    def transform(self, raw_rows: np.ndarray, clip: bool = True) -> np.ndarray:
        raw_rows = np.atleast_2d(np.asarray(raw_rows, dtype=np.float64))
        out = raw_rows.copy()
        lo = np.asarray(self.lo)
        span = np.asarray(self.hi) - lo
        z = np.log1p(raw_rows[:, SCALED_MASK]) - lo
        safe = np.where(span > 0, span, 1.0)
        z = np.where(span > 0, z / safe, 0.0)
        if clip:
            z = np.clip(z, 0.0, 1.0)
        out[:, SCALED_MASK] = z
        return out

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi)}

    @classmethod
    def from_dict(cls, d: Mapping) -> "ScalerParams":
        return cls(tuple(d["lo"]), tuple(d["hi"]))


def psid_one_hot(psid: int) -> list[float]:
    if not 0 <= int(psid) < NUM_PSIDS:
        raise InvalidStrategyError(f"psid {psid} outside 0..{NUM_PSIDS - 1}")
    v = [0.0] * NUM_PSIDS
    v[int(psid)] = 1.0
    return v


def decode_psid(row: Sequence[float]) -> int:
    tail = list(row[-NUM_PSIDS:])
    return tail.index(max(tail))


def raw_row(df: DataFeatureVector, af, psid: int) -> np.ndarray:
    """Unscaled encoded row. ``af`` is an AlgorithmFeatureVector or a sequence in ALGO_FEATURES order."""
    af_vals = af.as_list() if hasattr(af, "as_list") else [float(x) for x in af]
    if len(af_vals) != len(ALGO_FEATURES):
        raise ValueError(f"algorithm feature vector must have {len(ALGO_FEATURES)} entries")
    return np.array(df.as_row() + af_vals + psid_one_hot(psid), dtype=np.float64)


def encode(df: DataFeatureVector, af, psid: int, scaler: ScalerParams) -> np.ndarray:
    return scaler.transform(raw_row(df, af, psid))[0]


def encode_many(rows: Iterable[np.ndarray], scaler: ScalerParams) -> np.ndarray:
    return scaler.transform(np.vstack(list(rows)))
