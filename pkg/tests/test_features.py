import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from conftest import random_edges
from partsel.datasets import snap_graph
from partsel.dsl_analyzer import AlgorithmFeatureVector
from partsel.features import (ALGO_FEATURES, DATA_FEATURES, ENCODED_FIELDS, ENCODED_LENGTH, SCALED_MASK,
                              DataFeatureVector, InvalidStrategyError, ScalerParams, decode_psid, encode,
                              extract_data_features, psid_one_hot, raw_row)
from partsel.graph_core import Graph


def test_layout_constants():
    assert len(DATA_FEATURES) == 16 and len(ALGO_FEATURES) == 21
    assert ENCODED_LENGTH == len(ENCODED_FIELDS) == 49
    assert int(SCALED_MASK.sum()) == 10 + 21


def test_regular_graph():
    # K4 is 3-regular
    g = Graph.from_edges([(a, b) for a in range(4) for b in range(a + 1, 4)], directed=False)
    df = extract_data_features(g)
    assert df.in_mean == 3.0 and df.in_std == 0.0
    assert (df.in_skew_abs, df.in_skew_sign, df.in_kurt_abs, df.in_kurt_sign) == (0.0, 0, 0.0, 0)
    assert df.as_row()[-2:] == [0.0, 1.0]


def test_facebook_cardinalities():
    g, _ = snap_graph("ego-facebook")
    df = extract_data_features(g)
    assert (df.num_vertex, df.num_edge, df.directed) == (4039, 88234, False)


@pytest.mark.parametrize("directed", [True, False])
def test_moments_match_reference(directed):
    edges = random_edges(200, 900, seed=13)
    g = Graph.from_edges(edges, directed=directed)
    df = extract_data_features(g)
    vs = oracles.vertex_set(edges)
    for side, mode in (("in", "in"), ("out", "out")):
        seq = [oracles.degree_scan(edges, directed, v, mode) for v in vs]
        mean, std, skew, kurt = oracles.moments(seq)
        assert getattr(df, f"{side}_mean") == pytest.approx(mean, rel=1e-12)
        assert getattr(df, f"{side}_std") == pytest.approx(std, rel=1e-12)
        assert getattr(df, f"{side}_skew_abs") == pytest.approx(abs(skew), rel=1e-9)
        assert getattr(df, f"{side}_skew_sign") == int(skew > 0)
        assert getattr(df, f"{side}_kurt_abs") == pytest.approx(abs(kurt), rel=1e-9)
        assert getattr(df, f"{side}_kurt_sign") == 1
    if not directed:
        assert df.in_mean == df.out_mean and df.in_std == df.out_std


def test_mean_times_vertices_is_total_degree(small_directed):
    _, g = small_directed
    df = extract_data_features(g)
    assert df.in_mean * df.num_vertex == pytest.approx(g.num_edges)
    assert df.out_mean * df.num_vertex == pytest.approx(g.num_edges)


def test_permutation_invariance():
    edges = random_edges(80, 300, seed=1)
    shuffled = edges[:]
    random.Random(0).shuffle(shuffled)
    assert extract_data_features(Graph.from_edges(edges)) == extract_data_features(Graph.from_edges(shuffled))


def test_one_hot():
    v = psid_one_hot(5)
    assert v.index(1.0) == 5 and sum(v) == 1.0 and len(v) == 12
    for bad in (-1, 12):
        with pytest.raises(InvalidStrategyError):
            psid_one_hot(bad)


def _sample_rows(n=20, seed=0):
    rng = np.random.default_rng(seed)
    rows = []
    for k in range(n):
        df = DataFeatureVector(int(rng.integers(10, 5000)), int(rng.integers(10, 90000)), *rng.random(2),
                               float(rng.random()), 1, float(rng.random() * 5), 1, *rng.random(2),
                               float(rng.random()), 0, float(rng.random() * 5), 1, bool(k % 2))
        af = AlgorithmFeatureVector(rng.random(21) * 10 ** rng.integers(0, 7))
        rows.append(raw_row(df, af, k % 12))
    return np.vstack(rows)


def test_scaler_boundaries_and_clip():
    raw = _sample_rows()
    sc = ScalerParams.fit(raw)
    X = sc.transform(raw)
    cols = np.flatnonzero(SCALED_MASK)
    for c in cols:
        j = int(np.argmax(raw[:, c]))
        if raw[:, c].max() > raw[:, c].min():
            assert X[j, c] == 1.0
    big = raw[:1].copy()
    big[0, cols] = raw[:, cols].max(axis=0) * 10
    assert sc.transform(big)[0, cols].max() == 1.0
    assert sc.transform(big, clip=False)[0, cols].max() > 1.0
    assert ScalerParams.from_dict(sc.to_dict()) == sc


def test_encode_layout_and_decode():
    raw = _sample_rows()
    sc = ScalerParams.fit(raw)
    g, _ = snap_graph("ego-facebook")
    df = extract_data_features(g)
    af = AlgorithmFeatureVector.zeros()
    x = encode(df, af, 0, sc)
    assert x.shape == (ENCODED_LENGTH,)
    assert decode_psid(x) == 0
    assert len({decode_psid(encode(df, af, p, sc)) for p in range(12)}) == 12


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 1e9), st.floats(0, 1e9))
def test_scaling_monotone(a, b):
    sc = ScalerParams.fit(_sample_rows(seed=3))
    row_a = _sample_rows(1, seed=4)
    row_b = row_a.copy()
    c = int(np.flatnonzero(SCALED_MASK)[-1])
    row_a[0, c], row_b[0, c] = a, b
    if a > b:
        assert sc.transform(row_a)[0, c] >= sc.transform(row_b)[0, c]


def test_dict_roundtrip():
    g, _ = snap_graph("wiki-vote")
    df = extract_data_features(g)
    assert DataFeatureVector.from_dict(df.to_dict()) == df
