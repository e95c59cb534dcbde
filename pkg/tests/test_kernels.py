import numpy as np
import pytest

from conftest import random_edges
from partsel import kernels
from partsel.graph_core import Graph
from partsel.partitioners import partition_greedy

backends = kernels.available_backends()
needs_cython = pytest.mark.skipif("cython" not in backends, reason="compiled kernels not built")


def test_backend_selected():
    assert kernels.BACKEND in ("python", "cython")
    assert "python" in backends


@needs_cython
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_greedy_kernels_agree(seed):
    g = Graph.from_edges(random_edges(300, 2000, seed=seed))
    s = g.src_index.astype(np.int64)
    d = g.dst_index.astype(np.int64)
    py, cy = backends["python"], backends["cython"]
    for lam in (10.0, 100.0):
        assert np.array_equal(py.hdrf_assign(s, d, g.num_vertices, 16, lam, 1.0),
                              cy.hdrf_assign(s, d, g.num_vertices, 16, lam, 1.0))
    assert np.array_equal(py.oblivious_assign(s, d, g.num_vertices, 16),
                          cy.oblivious_assign(s, d, g.num_vertices, 16))


@needs_cython
def test_ginger_agrees(monkeypatch):
    g = Graph.from_edges(random_edges(300, 2500, seed=4))
    plans = {}
    for name, mod in backends.items():
        monkeypatch.setattr(kernels, "ginger_assign", mod.ginger_assign)
        plans[name] = partition_greedy(g, 16, "ginger", degree_threshold=12).edge_assignment
    assert np.array_equal(plans["python"], plans["cython"])
