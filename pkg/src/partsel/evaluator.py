"""Strategy selection, score ratios, rank curves and benefit-cost ratios.

Times here are whatever unit the execution logs use (engine cost units by
default); the benefit-cost ratio carries explicit unit labels because its
cost side is measured in wall-clock seconds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .partitioners import StrategySpec


class EvaluationError(ValueError):
    pass


def select_strategy(model, df, af, strategies: Sequence[StrategySpec]) -> tuple[int, list[float]]:
    """Strategy with the smallest predicted time; ties go to the lowest psid."""
    from .features import raw_row

    if not strategies:
        raise EvaluationError("no strategies to choose from")
    raw = np.vstack([raw_row(df, af, s.psid) for s in strategies])
    pred = [float(x) for x in np.atleast_1d(model.predict_raw(raw))]
    return pick_fastest([s.psid for s in strategies], pred), pred


def pick_fastest(psids: Sequence[int], times: Sequence[float]) -> int:
    if not psids:
        raise EvaluationError("no strategies to choose from")
    return min(zip(times, psids))[1]


@dataclass(frozen=True)
class ScoreRow:
    t_best: float
    t_worst: float
    t_avg: float
    t_sel: float
    score_best: float
    score_worst: float
    score_avg: float
    selected: int
    rank: int


def compute_scores(times: Mapping[int, float], selected: int) -> ScoreRow:
    """Ratios of best/worst/mean strategy time to the selected one.

    ``rank`` is 1 + the number of strictly faster strategies, so ties share
    the better rank.
    """
    if selected not in times:
        raise EvaluationError(f"selected psid {selected} has no measured time")
    vals = np.array([times[p] for p in sorted(times)], dtype=np.float64)
    if (vals <= 0).any() or not np.isfinite(vals).all():
        raise EvaluationError("execution times must be positive and finite")
    t_sel = float(times[selected])
    t_best = float(vals.min())
    t_worst = float(vals.max())
    t_avg = float(vals.sum() / len(vals))
    rank = 1 + int((vals < t_sel).sum())
    return ScoreRow(t_best, t_worst, t_avg, t_sel, t_best / t_sel, t_worst / t_sel, t_avg / t_sel,
                    int(selected), rank)


def rank_cumulative(ranks: Iterable[int], n_strategies: int) -> list[float]:
    """Fraction of tasks whose selection ranked at or above each rank 1..n."""
    r = np.asarray(list(ranks), dtype=np.int64)
    if len(r) == 0:
        raise EvaluationError("no ranks to aggregate")
    if r.min() < 1 or r.max() > n_strategies:
        raise EvaluationError("rank out of range")
    counts = np.bincount(r, minlength=n_strategies + 1)[1:]
    return (np.cumsum(counts) / len(r)).tolist()


def random_baseline(times: Mapping[int, float], draws: int = 1000, seed: int = 0) -> dict:
    """Mean scores and rank of uniformly random selections."""
    if draws < 1:
        raise EvaluationError("draws must be >= 1")
    psids = sorted(times)
    rng = np.random.Generator(np.random.Philox(key=[seed & 0xFFFFFFFFFFFFFFFF, 0]))
    picks = rng.integers(0, len(psids), size=draws)
    rows = {p: compute_scores(times, p) for p in psids}
    sel = [rows[psids[k]] for k in picks.tolist()]
    return {
        "score_best": float(np.mean([s.score_best for s in sel])),
        "score_worst": float(np.mean([s.score_worst for s in sel])),
        "score_avg": float(np.mean([s.score_avg for s in sel])),
        "rank": float(np.mean([s.rank for s in sel])),
    }


def expected_random_scores(times: Mapping[int, float]) -> dict:
    """Closed-form expectation of :func:`random_baseline`."""
    rows = [compute_scores(times, p) for p in sorted(times)]
    return {
        "score_best": float(np.mean([s.score_best for s in rows])),
        "score_worst": float(np.mean([s.score_worst for s in rows])),
        "score_avg": float(np.mean([s.score_avg for s in rows])),
        "rank": float(np.mean([s.rank for s in rows])),
    }


def test_set(graph: str, algorithm: str, train_graphs: Iterable[str], train_algorithms: Iterable[str]) -> str:
    """A: unseen graph and algorithm, B: unseen graph, C: unseen algorithm, D: both seen."""
    g_seen = graph in set(train_graphs)
    a_seen = algorithm in set(train_algorithms)
    if not g_seen and not a_seen:
        return "A"
    if not g_seen:
        return "B"
    if not a_seen:
        return "C"
    return "D"


test_set.__test__ = False  # not a pytest test


@dataclass(frozen=True)
class BcReport:
    benefit: float
    feature_time: float
    analysis_time: float
    predict_time: float
    bc_ratio: float
    benefit_unit: str = "cost units"
    cost_unit: str = "seconds"

    @property
    def cost(self) -> float:
        return self.feature_time + self.analysis_time + self.predict_time


def bc_ratio(benefit_time: float, feature_time: float, analysis_time: float, predict_time: float) -> float:
    """Benefit over the time spent selecting (features + analysis + prediction)."""
    parts = (feature_time, analysis_time, predict_time)
    if min(parts) < 0:
        raise EvaluationError("component times must be non-negative")
    total = feature_time + analysis_time + predict_time
    if total <= 0:
        raise EvaluationError("total selection cost is zero")
    return benefit_time / total


def bc_report(t_worst: float, t_sel: float, feature_time: float, analysis_time: float, predict_time: float,
              benefit_unit: str = "cost units", cost_unit: str = "seconds") -> BcReport:
    benefit = t_worst - t_sel
    return BcReport(benefit, feature_time, analysis_time, predict_time,
                    bc_ratio(benefit, feature_time, analysis_time, predict_time), benefit_unit, cost_unit)
