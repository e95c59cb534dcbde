"""Time the compiled kernels against the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat N] [--graph NAME]
"""
import argparse
import time

import numpy as np

from partsel import kernels
from partsel.datasets import load_bundled
from partsel.etrm import TrainConfig, train
from partsel.partitioners import partition_greedy


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases(graph):
    s = graph.src_index.astype(np.int64)
    d = graph.dst_index.astype(np.int64)
    rng = np.random.default_rng(0)
    X = rng.random((5000, 49))
    y = 1000 * X[:, 0] + 300 * X[:, 3] * X[:, 4] + rng.normal(size=5000)
    cfg = TrainConfig(n_estimators=20, max_depth=8)

    def hdrf(mod):
        return lambda: mod.hdrf_assign(s, d, graph.num_vertices, 16, 10.0, 1.0)

    def ginger(mod):
        def run():
            saved = kernels.ginger_assign
            kernels.ginger_assign = mod.ginger_assign
            try:
                partition_greedy(graph, 16, "ginger")
            finally:
                kernels.ginger_assign = saved
        return run

    def grow(mod):
        return lambda: train(X, y, cfg, backend=mod)

    return {"hdrf": hdrf, "ginger": ginger, "train 20 trees": grow}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--graph", default="dba-1000")
    args = ap.parse_args(argv)
    backends = kernels.available_backends()
    g = load_bundled(args.graph)
    print(f"graph {g.name}: {g.num_vertices} vertices, {g.num_edges} edges; backends {sorted(backends)}")
    print(f"{'kernel':<16}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}")
    for name, make in cases(g).items():
        t = {b: best_of(make(mod), args.repeat) for b, mod in backends.items()}
        speed = f"{t['python'] / t['cython']:.1f}x" if "cython" in t else "-"
        print(f"{name:<16}" + "".join(f"{t[b]:>11.4f}s" for b in backends) + f"{speed:>10}")


if __name__ == "__main__":
    main()
