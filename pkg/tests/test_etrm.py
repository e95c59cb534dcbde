import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from partsel.etrm import (FORMAT_VERSION, DataError, DimensionError, EtrmModel, TrainConfig, feature_importance,
                          leaf_weight, predict, split_gain, train)
from partsel.kernels import available_backends

EXACT = dict(subsample=1.0, colsample_bytree=1.0, gamma=0.0, reg_alpha=0.0)


def leaf_objective(r, lam):
    """min_w sum (r - w)^2 + lam w^2, with w from a least-squares solve."""
    A = np.concatenate([np.ones(len(r)), [np.sqrt(lam)]])[:, None]
    b = np.concatenate([r, [0.0]])
    w = np.linalg.lstsq(A, b, rcond=None)[0][0]
    return float(((r - w) ** 2).sum() + lam * w * w)


def brute_gain(r, mask, lam, gamma):
    before = leaf_objective(r, lam) + gamma
    after = leaf_objective(r[mask], lam) + leaf_objective(r[~mask], lam) + 2 * gamma
    return before - after


def test_split_gain_matches_brute_force_objective():
    rng = np.random.default_rng(0)
    for _ in range(100):
        y = rng.normal(size=20) * rng.uniform(0.1, 100)
        pred = rng.normal(size=20)
        mask = rng.random(20) < 0.5
        mask[0], mask[1] = True, False
        lam, gamma = rng.uniform(0, 3), rng.uniform(0, 1)
        g = pred - y
        got = split_gain(g[mask].sum(), mask.sum(), g[~mask].sum(), (~mask).sum(), lam, gamma)
        assert got == pytest.approx(brute_gain(y - pred, mask, lam, gamma), rel=1e-9, abs=1e-9)


def test_identical_children():
    assert split_gain(3.0, 2.0, 3.0, 2.0, 1.0, 0.25) == pytest.approx(
        2 * 9 / 3 - 36 / 5 - 0.25)
    assert split_gain(3.0, 2.0, 3.0, 2.0, 0.0, 0.25) == pytest.approx(-0.25)


def test_hand_computed_gain():
    # targets {0,0,4,4}, base 2: residual sums -4 and +4, SSE drops from 16 to 0
    assert split_gain(-4.0, 2.0, 4.0, 2.0, 0.0, 0.0) == 16.0


def test_large_gamma_rejects():
    assert split_gain(-4.0, 2.0, 4.0, 2.0, 0.0, 100.0) < 0


def test_leaf_weight_soft_threshold():
    assert leaf_weight(-4.0, 2.0, 0.0) == 2.0
    assert leaf_weight(-4.0, 2.0, 0.0, alpha=1.0) == 1.5
    assert leaf_weight(0.5, 2.0, 0.0, alpha=1.0) == 0.0


def test_one_sample():
    m = train(np.array([[0.3, 0.7]]), np.array([5.0]), TrainConfig(n_estimators=1))
    assert predict(m, np.array([[0.3, 0.7]]))[0] == 5.0


def test_zero_trees_is_base():
    X = np.random.default_rng(1).random((30, 3))
    y = np.arange(30.0)
    m = train(X, y, TrainConfig(n_estimators=0))
    assert np.all(m.predict(X) == y.mean())


def test_two_cluster_split_at_boundary():
    rng = np.random.default_rng(2)
    x = rng.random(200)
    X = np.column_stack([x, rng.random(200)])
    y = np.where(x < 0.5, 1.0, 9.0)
    cfg = TrainConfig(n_estimators=1, max_depth=1, reg_lambda=0.0, learning_rate=1.0, min_child_weight=0.0,
                      **EXACT)
    tree = train(X, y, cfg).trees[0]
    # exhaustive oracle over split points of feature 0
    xs = np.sort(x)
    best = min(range(1, len(xs)), key=lambda i: ((y[x < xs[i]] - y[x < xs[i]].mean()) ** 2).sum()
               + ((y[x >= xs[i]] - y[x >= xs[i]].mean()) ** 2).sum())
    assert tree.feature[0] == 0
    assert xs[best - 1] < tree.threshold[0] <= xs[best]
    assert xs[best - 1] < 0.5 <= xs[best]


def test_loss_non_increasing_without_sampling():
    rng = np.random.default_rng(3)
    X = rng.random((300, 6))
    y = 50 * X[:, 0] ** 2 + 10 * X[:, 1] + rng.normal(size=300)
    m = train(X, y, TrainConfig(n_estimators=60, max_depth=4, **EXACT))
    loss = np.array(m.train_loss)
    assert np.all(np.diff(loss) <= 1e-12 * loss[:-1])


def test_default_config_loss_decreases():
    rng = np.random.default_rng(4)
    X = rng.random((400, 10))
    y = 1000 * X[:, 0] + 300 * X[:, 3] * X[:, 4]
    m = train(X, y, TrainConfig(n_estimators=50))
    assert np.all(np.diff(m.train_loss) < 0)


def test_overfit_sanity():
    rng = np.random.default_rng(5)
    X = rng.random((60, 4))
    y = rng.uniform(10, 100, 60)
    m = train(X, y, TrainConfig(n_estimators=400, max_depth=15, learning_rate=0.3, reg_lambda=0.0,
                                min_child_weight=0.0, **EXACT))
    assert np.all(np.abs(m.predict(X) - y) <= 0.01 * np.abs(y))


def test_deterministic_and_pure():
    rng = np.random.default_rng(6)
    X = rng.random((80, 5))
    y = X.sum(axis=1)
    a = train(X, y, TrainConfig(n_estimators=20))
    b = train(X, y, TrainConfig(n_estimators=20))
    assert a.dumps() == b.dumps()
    assert np.array_equal(a.predict(X[:2]), a.predict(X[:2]))


def test_row_order_invariance():
    rng = np.random.default_rng(7)
    X = rng.random((120, 5))
    y = 3 * X[:, 1] + X[:, 2]
    perm = rng.permutation(120)
    a = train(X, y, TrainConfig(n_estimators=15, seed=9))
    b = train(X[perm], y[perm], TrainConfig(n_estimators=15, seed=9))
    assert np.array_equal(a.predict(X), b.predict(X))


def test_data_errors():
    X = np.ones((3, 2))
    X[1, 0] = np.nan
    with pytest.raises(DataError, match="row 1"):
        train(X, np.ones(3))
    with pytest.raises(DataError):
        train(np.ones((3, 2)), np.array([1.0, np.inf, 2.0]))
    with pytest.raises(DataError):
        train(np.ones((0, 2)), np.ones(0))


def test_dimension_error():
    m = train(np.random.default_rng(0).random((10, 3)), np.arange(10.0), TrainConfig(n_estimators=2))
    with pytest.raises(DimensionError):
        m.predict(np.ones((1, 4)))


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(subsample=0.0)
    with pytest.raises(ValueError):
        TrainConfig(max_depth=0)
    assert TrainConfig().replace(seed=4).seed == 4


def test_default_hyperparameters():
    c = TrainConfig()
    assert (c.colsample_bytree, c.gamma, c.learning_rate, c.max_depth, c.min_child_weight, c.n_estimators,
            c.reg_alpha, c.reg_lambda, c.subsample) == (0.4603, 0.0468, 0.05, 15, 1.7817, 1000, 0.4640,
                                                        0.8571, 0.5213)


def test_single_split_importance():
    X = np.column_stack([np.r_[np.zeros(10), np.ones(10)], np.zeros(20)])
    y = np.r_[np.zeros(10), np.full(10, 8.0)]
    m = train(X, y, TrainConfig(n_estimators=1, max_depth=1, min_child_weight=0.0, **EXACT),
              feature_names=("a", "b"))
    imp = feature_importance(m)
    assert [(i.name, i.gain_importance, i.split_importance) for i in imp] == [("a", 1.0, 1)]


def test_no_split_importance_is_empty():
    m = train(np.ones((5, 2)), np.arange(5.0), TrainConfig(n_estimators=3))
    assert feature_importance(m) == []


def test_importance_sums_to_one():
    rng = np.random.default_rng(8)
    X = rng.random((200, 8))
    y = X @ np.arange(8.0) + rng.normal(size=200)
    imp = feature_importance(train(X, y, TrainConfig(n_estimators=40)))
    assert abs(sum(i.gain_importance for i in imp) - 1.0) <= 1e-9


def test_persistence_roundtrip(tmp_path):
    rng = np.random.default_rng(9)
    X = rng.random((100, 4))
    m = train(X, X[:, 0] * 10, TrainConfig(n_estimators=10, target="log"))
    p = tmp_path / "m.json"
    m.save(p)
    again = EtrmModel.load(p)
    assert np.array_equal(again.predict(X), m.predict(X))
    assert again.dumps() == m.dumps()
    d = json.loads(m.dumps())
    d["version"] = FORMAT_VERSION + 1
    with pytest.raises(ValueError):
        EtrmModel.from_dict(d)


@pytest.mark.skipif("cython" not in available_backends(), reason="compiled kernels not built")
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_backends_identical(seed):
    be = available_backends()
    rng = np.random.default_rng(seed)
    X = np.round(rng.random((150, 7)), 2)
    y = X[:, 0] * 100 + rng.normal(size=150)
    cfg = TrainConfig(n_estimators=8, seed=seed)
    assert train(X, y, cfg, backend=be["python"]).dumps() == train(X, y, cfg, backend=be["cython"]).dumps()


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=20), st.floats(0, 5), st.floats(0, 2))
def test_gain_property(r, lam, gamma):
    r = np.array(r)
    mask = np.zeros(len(r), dtype=bool)
    mask[: len(r) // 2] = True
    got = split_gain(-r[mask].sum(), mask.sum(), -r[~mask].sum(), (~mask).sum(), lam + 1e-3, gamma)
    want = brute_gain(r, mask, lam + 1e-3, gamma)
    assert got == pytest.approx(want, rel=1e-7, abs=1e-6)
