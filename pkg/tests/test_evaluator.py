import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partsel.dsl_analyzer import AlgorithmFeatureVector
from partsel.etrm import TrainConfig, train
from partsel.evaluator import (EvaluationError, bc_ratio, bc_report, compute_scores, expected_random_scores,
                               pick_fastest, random_baseline, rank_cumulative, select_strategy, test_set)
from partsel.features import ENCODED_LENGTH, ScalerParams, cardinality_features, raw_row
from partsel.partitioners import StrategySpec, default_strategies


class FixedModel:
    def __init__(self, preds):
        self.preds = preds

    def predict_raw(self, raw):
        return np.array(self.preds[: len(raw)])


DF = cardinality_features(100, 400, True)
AF = AlgorithmFeatureVector.zeros()


def test_select_single_and_argmin():
    specs = default_strategies()[:3]
    assert select_strategy(FixedModel([5.0]), DF, AF, specs[:1])[0] == specs[0].psid
    psid, preds = select_strategy(FixedModel([3.0, 1.0, 2.0]), DF, AF, specs)
    assert psid == specs[1].psid and preds == [3.0, 1.0, 2.0]


def test_select_empty():
    with pytest.raises(EvaluationError):
        select_strategy(FixedModel([]), DF, AF, [])


def test_constant_model_picks_lowest_psid():
    raw = np.vstack([raw_row(DF, AF, p) for p in range(12)])
    model = train(np.zeros((4, ENCODED_LENGTH)), np.ones(4), TrainConfig(n_estimators=0),
                  scaler=ScalerParams.fit(raw))
    specs = [StrategySpec.from_psid(p) for p in (9, 3, 7)]
    assert select_strategy(model, DF, AF, specs)[0] == 3
    assert pick_fastest([4, 2], [1.0, 1.0]) == 2


def test_scores_examples():
    r = compute_scores({0: 10.0, 1: 20.0, 2: 40.0}, 1)
    assert (r.score_best, r.score_worst) == (0.5, 2.0)
    assert r.score_avg == pytest.approx((70 / 3) / 20)
    assert r.rank == 2
    best = compute_scores({0: 10.0, 1: 20.0}, 0)
    assert (best.score_best, best.rank) == (1.0, 1)
    same = compute_scores({0: 3.0, 1: 3.0, 2: 3.0}, 2)
    assert (same.score_best, same.score_worst, same.score_avg, same.rank) == (1.0, 1.0, 1.0, 1)


def test_scores_errors():
    with pytest.raises(EvaluationError):
        compute_scores({0: 1.0, 1: 0.0}, 0)
    with pytest.raises(EvaluationError):
        compute_scores({0: 1.0}, 3)


def test_rank_curve():
    assert rank_cumulative([1, 1, 1], 4) == [1.0] * 4
    assert rank_cumulative([1, 2], 3) == [0.5, 1.0, 1.0]
    with pytest.raises(EvaluationError):
        rank_cumulative([], 3)
    with pytest.raises(EvaluationError):
        rank_cumulative([5], 3)


def test_bc():
    assert bc_ratio(10.0, 2.0, 2.0, 1.0) == 2.0
    assert bc_ratio(0.0, 1.0, 0.0, 0.0) == 0.0
    with pytest.raises(EvaluationError):
        bc_ratio(1.0, 0.0, 0.0, 0.0)
    with pytest.raises(EvaluationError):
        bc_ratio(1.0, -1.0, 2.0, 0.0)
    rep = bc_report(100.0, 40.0, 1.0, 1.0, 1.0)
    assert rep.benefit == 60.0 and rep.bc_ratio == 20.0 and rep.cost == 3.0
    assert (rep.benefit_unit, rep.cost_unit) == ("cost units", "seconds")
    assert bc_report(40.0, 40.0, 1.0, 0.0, 0.0).bc_ratio == 0.0


def test_test_set_labels():
    tg, ta = ["g1"], ["PR"]
    labels = {(g, a): test_set(g, a, tg, ta) for g in ("g1", "g2") for a in ("PR", "CC")}
    assert labels == {("g2", "CC"): "A", ("g2", "PR"): "B", ("g1", "CC"): "C", ("g1", "PR"): "D"}


def test_random_baseline_expected_rank():
    times = {p: float(t) for p, t in zip(range(11), [5, 9, 1, 7, 3, 11, 2, 8, 6, 4, 10])}
    rb = random_baseline(times, draws=2000, seed=1)
    assert abs(rb["rank"] - 6.0) <= 0.5
    assert expected_random_scores(times)["rank"] == 6.0
    assert random_baseline(times, draws=2000, seed=1) == rb


times_st = st.dictionaries(st.integers(0, 11), st.floats(1e-3, 1e6), min_size=1, max_size=11)


@settings(max_examples=100, deadline=None)
@given(times_st, st.data())
def test_score_algebra(times, data):
    sel = data.draw(st.sampled_from(sorted(times)))
    r = compute_scores(times, sel)
    assert r.t_best <= r.t_sel <= r.t_worst
    assert r.score_best <= 1.0 <= r.score_worst
    assert 0 < r.score_best and r.score_avg > 0
    assert 1 <= r.rank <= len(times)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(1, 11), min_size=1, max_size=40))
def test_rank_curve_monotone(ranks):
    c = rank_cumulative(ranks, 11)
    assert all(a <= b for a, b in zip(c, c[1:])) and c[-1] == 1.0
