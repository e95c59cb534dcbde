import os
import random
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from partsel.graph_core import Graph  # noqa: E402


def random_edges(n, m, seed, self_loops=False):
    rnd = random.Random(seed)
    out = []
    while len(out) < m:
        u, v = rnd.randrange(n), rnd.randrange(n)
        if u != v or self_loops:
            out.append((u, v))
    return out


def simple_edges(n, m, seed):
    """Random simple undirected edge list, each pair stored once as (min, max)."""
    rnd = random.Random(seed)
    seen = set()
    while len(seen) < m:
        u, v = rnd.randrange(n), rnd.randrange(n)
        if u != v:
            seen.add((min(u, v), max(u, v)))
    return sorted(seen)


@pytest.fixture
def path_graph():
    return Graph.from_edges([(0, 1), (1, 2)], directed=True, name="path")


@pytest.fixture(scope="session")
def small_directed():
    edges = random_edges(60, 240, seed=3)
    return edges, Graph.from_edges(edges, directed=True, name="rd60")


@pytest.fixture(scope="session")
def small_undirected():
    edges = simple_edges(50, 160, seed=4)
    return edges, Graph.from_edges(edges, directed=False, name="ru50")


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
