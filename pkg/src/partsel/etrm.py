"""Execution Time Regression Model: gradient-boosted regression trees.

Squared-error boosting with exact greedy splits. With residual gradients
``g = y_hat - y`` and ``h = 1`` (the halved squared loss), a split's gain is

    T(G_L)^2/(H_L+lam) + T(G_R)^2/(H_R+lam) - T(G)^2/(H+lam) - gamma

and a leaf's weight is ``-T(G)/(H+lam)``, where ``T`` soft-thresholds by
``reg_alpha`` (identity when it is 0). Using the unhalved loss scales g
and h by 2, which leaves the argmax over splits unchanged; see
``docs/etrm-notes.md``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

import numpy as np

from . import kernels
from .features import ScalerParams

FORMAT = "partsel-etrm"
FORMAT_VERSION = 1


class DataError(ValueError):
    pass


class DimensionError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    colsample_bytree: float = 0.4603
    gamma: float = 0.0468
    learning_rate: float = 0.05
    max_depth: int = 15
    min_child_weight: float = 1.7817
    n_estimators: int = 1000
    reg_alpha: float = 0.4640
    reg_lambda: float = 0.8571
    subsample: float = 0.5213
    objective: str = "squared_error"
    seed: int = 0
    # "log" fits log1p(exec_time) and maps predictions back with expm1
    target: str = "raw"

    def __post_init__(self):
        for name in ("colsample_bytree", "learning_rate", "subsample"):
            v = getattr(self, name)
            if not 0.0 < v <= 1.0:
                raise ValueError(f"{name} must be in (0, 1], got {v}")
        if self.max_depth < 1 or self.n_estimators < 0:
            raise ValueError("max_depth must be >= 1 and n_estimators >= 0")
        if min(self.gamma, self.min_child_weight, self.reg_alpha, self.reg_lambda) < 0:
            raise ValueError("regularisation parameters must be non-negative")
        if self.objective != "squared_error":
            raise ValueError(f"unsupported objective {self.objective!r}")
        if self.target not in ("raw", "log"):
            raise ValueError(f"unknown target transform {self.target!r}")

    def replace(self, **kw) -> "TrainConfig":
        return TrainConfig(**{**asdict(self), **kw})


def soft_threshold(G: float, alpha: float) -> float:
    if G > alpha:
        return G - alpha
    if G < -alpha:
        return G + alpha
    return 0.0


def split_gain(G_L: float, H_L: float, G_R: float, H_R: float, lam: float, gamma: float,
               alpha: float = 0.0) -> float:
    """Loss reduction of splitting a node into (L, R)."""
    if H_L < 0 or H_R < 0:
        raise ValueError("hessian sums must be non-negative")
    tl = soft_threshold(G_L, alpha)
    tr = soft_threshold(G_R, alpha)
    t = soft_threshold(G_L + G_R, alpha)
    return tl * tl / (H_L + lam) + tr * tr / (H_R + lam) - t * t / (H_L + H_R + lam) - gamma


def leaf_weight(G: float, H: float, lam: float, alpha: float = 0.0) -> float:
    return -soft_threshold(G, alpha) / (H + lam)


@dataclass
class RegressionTree:
    feature: np.ndarray  # -1 marks a leaf
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray
    cover: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        d = np.zeros(self.n_nodes, dtype=np.int64)
        for k in range(self.n_nodes):
            if self.feature[k] >= 0:
                d[self.left[k]] = d[self.right[k]] = d[k] + 1
        return int(d.max()) if self.n_nodes else 0

    def leaves(self) -> np.ndarray:
        return np.flatnonzero(self.feature < 0)

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                return node
            r = rows[inner]
            nd = node[inner]
            go_left = X[r, f[inner]] < self.threshold[nd]
            node[r] = np.where(go_left, self.left[nd], self.right[nd])

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        return {k.name: getattr(self, k.name).tolist() for k in fields(self)}

    @classmethod
    def from_dict(cls, d: dict) -> "RegressionTree":
        ints = {"feature", "left", "right"}
        return cls(**{k.name: np.asarray(d[k.name], dtype=np.int32 if k.name in ints else np.float64)
                      for k in fields(cls)})


@dataclass
class EtrmModel:
    config: TrainConfig
    base: float
    trees: list = field(default_factory=list)
    num_features: int = 0
    feature_names: tuple = ()
    scaler: ScalerParams | None = None
    gain_total: np.ndarray | None = None
    split_count: np.ndarray | None = None
    train_loss: list = field(default_factory=list)

    def predict(self, X) -> np.ndarray:
        """Predictions for already-encoded rows (1-D input gives a 0-d result)."""
        X = np.asarray(X, dtype=np.float64)
        single = X.ndim == 1
        X = np.atleast_2d(X)
        if X.shape[1] != self.num_features:
            raise DimensionError(f"expected {self.num_features} features, got {X.shape[1]}")
        out = np.full(X.shape[0], self.base)
        lr = self.config.learning_rate
        for t in self.trees:
            out += lr * t.predict(X)
        if self.config.target == "log":
            out = np.expm1(out)
        return out[0] if single else out

    def predict_raw(self, raw_rows) -> np.ndarray:
        if self.scaler is None:
            raise ValueError("model has no scaler")
        return self.predict(self.scaler.transform(raw_rows))

    # persistence -------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": FORMAT_VERSION,
            "config": asdict(self.config),
            "base": self.base,
            "num_features": self.num_features,
            "feature_names": list(self.feature_names),
            "scaler": self.scaler.to_dict() if self.scaler else None,
            "gain_total": self.gain_total.tolist() if self.gain_total is not None else None,
            "split_count": self.split_count.tolist() if self.split_count is not None else None,
            "train_loss": list(self.train_loss),
            "trees": [t.to_dict() for t in self.trees],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())
            fh.write("\n")

    @classmethod
    def from_dict(cls, d: dict) -> "EtrmModel":
        if d.get("format") != FORMAT:
            raise ValueError("not a model file")
        if d.get("version") != FORMAT_VERSION:
            raise ValueError(f"model format version {d.get('version')} is not supported "
                             f"(expected {FORMAT_VERSION})")
        return cls(
            config=TrainConfig(**d["config"]),
            base=float(d["base"]),
            trees=[RegressionTree.from_dict(t) for t in d["trees"]],
            num_features=int(d["num_features"]),
            feature_names=tuple(d["feature_names"]),
            scaler=ScalerParams.from_dict(d["scaler"]) if d["scaler"] else None,
            gain_total=np.asarray(d["gain_total"]) if d["gain_total"] is not None else None,
            split_count=np.asarray(d["split_count"], dtype=np.int64) if d["split_count"] is not None else None,
            train_loss=list(d["train_loss"]),
        )

    @classmethod
    def loads(cls, text: str) -> "EtrmModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "EtrmModel":
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _canonical_order(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Row order independent of input order: lexicographic on (X columns, y)."""
    keys = [y] + [X[:, j] for j in range(X.shape[1] - 1, -1, -1)]
    return np.lexsort(keys)


def _round_rng(seed: int, round_: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, round_]))


def train(X, y, cfg: TrainConfig | None = None, *, scaler: ScalerParams | None = None,
          feature_names: Sequence[str] = (), backend=None) -> EtrmModel:
    """Fit the booster on encoded rows ``X`` and execution times ``y``."""
    cfg = cfg or TrainConfig()
    impl = backend or kernels
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise DataError("training set must be a non-empty 2-D array")
    if len(y) != len(X):
        raise DataError("X and y have different lengths")
    bad = ~np.isfinite(X).all(axis=1) | ~np.isfinite(y)
    if bad.any():
        raise DataError(f"non-finite value in training row {int(np.flatnonzero(bad)[0])}")
    if cfg.target == "log":
        if (y < 0).any():
            raise DataError(f"negative target in row {int(np.flatnonzero(y < 0)[0])}")
        y = np.log1p(y)
    perm = _canonical_order(X, y)
    X = np.ascontiguousarray(X[perm])
    y = y[perm]
    n, d = X.shape
    XT = np.ascontiguousarray(X.T)
    order = np.ascontiguousarray(np.argsort(XT, axis=1, kind="stable").astype(np.int64))
    xsorted = np.ascontiguousarray(np.take_along_axis(XT, order, axis=1))
    base = float(np.mean(y))
    pred = np.full(n, base)
    h = np.ones(n)
    k_cols = max(1, int(math.floor(d * cfg.colsample_bytree)))
    gain_total = np.zeros(d)
    split_count = np.zeros(d, dtype=np.int64)
    model = EtrmModel(cfg, base, [], d, tuple(feature_names), scaler)
    for t in range(cfg.n_estimators):
        rng = _round_rng(cfg.seed, t)
        if cfg.subsample < 1.0:
            u = rng.random(n)
            sampled = u < cfg.subsample
            if not sampled.any():
                sampled[int(np.argmin(u))] = True
        else:
            sampled = np.ones(n, dtype=bool)
        if k_cols < d:
            cols = np.sort(rng.permutation(d)[:k_cols]).astype(np.int64)
        else:
            cols = np.arange(d, dtype=np.int64)
        node_of = np.where(sampled, 0, -1).astype(np.int64)
        g = pred - y
        res = impl.grow_tree(XT, order, xsorted, g, h, node_of, cols, cfg.reg_lambda, cfg.gamma, cfg.reg_alpha,
                             cfg.min_child_weight, cfg.max_depth)
        tree = RegressionTree(*[np.asarray(a) for a in res])
        inner = tree.feature >= 0
        np.add.at(gain_total, tree.feature[inner], tree.gain[inner])
        np.add.at(split_count, tree.feature[inner], 1)
        model.trees.append(tree)
        pred = pred + cfg.learning_rate * tree.predict(X)
        model.train_loss.append(float(np.mean((pred - y) ** 2)))
    model.gain_total = gain_total
    model.split_count = split_count
    return model


def predict(model: EtrmModel, x) -> np.ndarray:
    return model.predict(x)


@dataclass(frozen=True)
class FeatureImportance:
    name: str
    gain_importance: float
    split_importance: int


def feature_importance(model: EtrmModel) -> list[FeatureImportance]:
    """Average gain per split, normalised to sum 1, and raw split counts.

    Features never used for a split are omitted; a model without splits
    gives an empty list.
    """
    if model.split_count is None or model.split_count.sum() == 0:
        return []
    used = np.flatnonzero(model.split_count > 0)
    avg = model.gain_total[used] / model.split_count[used]
    total = avg.sum()
    names = model.feature_names or tuple(f"f{j}" for j in range(model.num_features))
    out = [FeatureImportance(names[j], float(a / total) if total > 0 else 1.0 / len(used),
                             int(model.split_count[j]))
           for j, a in zip(used.tolist(), avg.tolist())]
    return sorted(out, key=lambda fi: (-fi.gain_importance, fi.name))
