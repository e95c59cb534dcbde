"""Command-line entry point: ``partsel <subcommand> ...``.

Graph arguments accept a file path, ``bundled:<name>`` for the packaged
desk graphs, or ``snap:<name>`` for a reference SNAP graph (a same-size
stand-in is used when the original file is not available).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .algorithms import ALGORITHM_NAMES, pseudocode_source, run_algorithm
from .augment import DESK_R_MAX
from .datasets import bundled_path, read_direction, snap_graph
from .dsl_analyzer import GpcError, count_ops, evaluate, evaluate_ir, format_listing, parse
from .etrm import EtrmModel, TrainConfig
from .evaluator import pick_fastest
from .features import ALGO_FEATURES, DATA_FEATURES, extract_data_features, raw_row
from .gas_engine import CostModel
from .graph_core import GraphError, load_edge_list
from .partitioners import (default_strategies, load_balance, parse_strategies, partition, plan_summary,
                           replication_factor)
from .pipeline import (OUTPUT_ENV, LogRow, RunManifest, algorithm_features, algorithm_params, evaluate_tasks,
                       fit_model, format_log_table, format_selections, read_log_table, read_task_table,
                       run_manifest, summarize, training_table, write_log_table, write_plan, write_task_table)


class CliError(Exception):
    pass


# helpers ---------------------------------------------------------------------


def load_graph(spec: str, directed: bool | None = None):
    if spec.startswith("snap:"):
        g, _ = snap_graph(spec[5:])
        return g
    path = bundled_path(spec[8:]) if spec.startswith("bundled:") else spec
    if not os.path.isfile(path):
        raise CliError(f"graph file not found: {path}")
    if directed is None:
        directed = read_direction(path)
        directed = True if directed is None else directed
    name = spec[8:] if spec.startswith("bundled:") else os.path.splitext(os.path.basename(path))[0]
    return load_edge_list(path, directed=directed, name=name)


def load_code(spec: str) -> tuple[str, str]:
    """(name, source) for a .gpc path or an algorithm name."""
    if spec.upper() in ALGORITHM_NAMES:
        return spec.upper(), pseudocode_source(spec.upper())
    if not os.path.isfile(spec):
        raise CliError(f"pseudo-code not found: {spec}")
    with open(spec, encoding="utf-8") as fh:
        return os.path.splitext(os.path.basename(spec))[0], fh.read()


def output_dir(args) -> str:
    d = args.output_dir or os.environ.get(OUTPUT_ENV) or "."
    os.makedirs(d, exist_ok=True)
    return d


def out_path(args, default_name: str) -> str:
    if args.out:
        parent = os.path.dirname(args.out)
        if parent:
            os.makedirs(parent, exist_ok=True)
        return args.out
    return os.path.join(output_dir(args), default_name)


def emit(args, pairs, title: str | None = None) -> None:
    """Print key/value pairs either aligned (text) or as comma-separated rows."""
    print(f"# seed={args.seed}")
    if args.format == "rows":
        print("key,value")
        for k, v in pairs:
            print(f"{k},{v}")
        return
    if title:
        print(title)
    width = max((len(str(k)) for k, _ in pairs), default=0)
    for k, v in pairs:
        print(f"  {str(k).ljust(width)}  {v}")


def _direction(args):
    if getattr(args, "directed", False):
        return True
    if getattr(args, "undirected", False):
        return False
    return None


def _strategies(args):
    if args.strategies:
        return parse_strategies(args.strategies.split(","), seed=args.seed)
    return default_strategies(seed=args.seed)


# subcommands -------------------------------------------------------------------


def cmd_ingest(args) -> int:
    g = load_graph(args.graph, _direction(args))
    deg = g.degree_array("both")
    emit(args, [("name", g.name), ("directed", str(g.directed).lower()), ("vertices", g.num_vertices),
                ("edges", g.num_edges), ("max_degree", int(deg.max()) if len(deg) else 0)], "graph")
    return 0


def cmd_features(args) -> int:
    g = load_graph(args.graph, _direction(args))
    df = extract_data_features(g)
    emit(args, list(zip(DATA_FEATURES, df.as_row())), f"data features: {g.name}")
    return 0


def cmd_analyze(args) -> int:
    name, src = load_code(args.code)
    ir = count_ops(parse(src))
    if args.graph is None:
        print(f"# seed={args.seed}")
        print(format_listing(ir))
        return 0
    df = extract_data_features(load_graph(args.graph, _direction(args)))
    if args.collapsed:
        af = evaluate(ir, df, args.moments)
        emit(args, list(zip(ALGO_FEATURES, af.as_list())), f"algorithm features: {name}")
        return 0
    vals = evaluate_ir(ir, df, args.moments)
    if args.format == "rows":
        emit(args, list(vals.items()))
    else:
        print(f"# seed={args.seed}")
        print(format_listing(ir, vals))
    return 0


def cmd_partition(args) -> int:
    g = load_graph(args.graph, _direction(args))
    specs = _strategies(args)
    if len(specs) != 1:
        raise CliError("partition takes exactly one strategy")
    plan = partition(g, specs[0], args.workers)
    path = out_path(args, f"{g.name}-{specs[0].psid:02d}-{specs[0].label}.plan")
    write_plan(path, plan, args.seed)
    s = plan_summary(plan)
    emit(args, [("strategy", specs[0].label), ("psid", specs[0].psid), ("workers", args.workers),
                ("replication_factor", f"{replication_factor(plan):.6f}"),
                ("load_balance", f"{load_balance(plan):.6f}"), ("max_replicas", s.get("max_replicas", "")),
                ("plan", path)], "partition")
    return 0


def cmd_run(args) -> int:
    if args.manifest:
        m = RunManifest.load(args.manifest)
        # flags override the manifest
        if args.seed_given:
            m.seed = args.seed
        if args.workers_given:
            m.num_workers = args.workers
        out = args.output_dir or None
        res = run_manifest(m, out, progress=(lambda s: print(s, file=sys.stderr)) if args.verbose else None)
        h = res.summary["held_out"] or res.summary["all"]
        emit(args, [("output_dir", res.output_dir), ("tasks", len(res.selections)),
                    ("held_out_score_best", f"{h['score_best']:.4f}"),
                    ("held_out_random_score_best", f"{h['random_score_best']:.4f}")]
             + [(k, v) for k, v in sorted(res.files.items())], f"run: {m.name}")
        return 0
    if not args.graph:
        raise CliError("run needs --manifest or --graph")
    g = load_graph(args.graph, _direction(args))
    algs = [a.upper() for a in args.algorithms.split(",")] if args.algorithms else list(ALGORITHM_NAMES)
    for a in algs:
        if a not in ALGORITHM_NAMES:
            raise CliError(f"unknown algorithm {a!r}")
    df = extract_data_features(g)
    afs = algorithm_features(algs, df)
    cost = CostModel(args.c_compute, args.c_msg, args.c_sync)
    rows = []
    for spec in _strategies(args):
        plan = partition(g, spec, args.workers)
        for a in algs:
            _, log = run_algorithm(a, g, plan, cost, **algorithm_params(a, args.seed))
            rows.append(LogRow(g.name, a, spec.psid, spec.label, args.workers, float(log.execution_time),
                               log.message_count, log.superstep_count, df, afs[a]))
    if args.out or args.output_dir or os.environ.get(OUTPUT_ENV):
        path = out_path(args, f"{g.name}-logs.csv")
        write_log_table(path, rows, args.seed)
        print(f"# wrote {len(rows)} rows to {path}", file=sys.stderr)
    else:
        sys.stdout.write(format_log_table(rows, args.seed))
    return 0


def _read_logs(paths):
    rows = []
    for p in paths:
        r, _ = read_log_table(p)
        rows.extend(r)
    return rows


def cmd_augment(args) -> int:
    rows = _read_logs(args.logs)
    algs = args.algorithms.split(",") if args.algorithms else sorted({r.algorithm for r in rows})
    graphs = args.graphs.split(",") if args.graphs else sorted({r.graph for r in rows})
    table = training_table(rows, graphs, algs, args.r_min, args.r_max)
    path = out_path(args, "augmented.csv")
    write_task_table(path, table, args.seed)
    emit(args, [("records", len(table)), ("graphs", len(graphs)), ("algorithms", len(algs)), ("table", path)],
         "augment")
    return 0


def cmd_train(args) -> int:
    if args.table:
        table, _ = read_task_table(args.table)
    elif args.logs:
        rows = _read_logs(args.logs)
        algs = sorted({r.algorithm for r in rows})
        table = training_table(rows, sorted({r.graph for r in rows}), algs, args.r_min, args.r_max)
    else:
        raise CliError("train needs --table or --logs")
    overrides = {"seed": args.seed}
    if args.params:
        with open(args.params, encoding="utf-8") as fh:
            overrides = {**json.load(fh), **overrides}
    if args.n_estimators is not None:
        overrides["n_estimators"] = args.n_estimators
    if args.target:
        overrides["target"] = args.target
    model = fit_model(table, TrainConfig(**overrides))
    path = out_path(args, "model.json")
    model.save(path)
    emit(args, [("records", len(table)), ("trees", len(model.trees)),
                ("final_train_loss", f"{model.train_loss[-1]:.6g}" if model.train_loss else "n/a"),
                ("model", path)], "train")
    return 0


def cmd_select(args) -> int:
    model = EtrmModel.load(args.model)
    g = load_graph(args.graph, _direction(args))
    name, src = load_code(args.code)
    df = extract_data_features(g)
    af = evaluate(count_ops(parse(src)), df)
    specs = _strategies(args)
    raw = np.vstack([raw_row(df, af, s.psid) for s in specs])
    pred = [float(x) for x in np.atleast_1d(model.predict_raw(raw))]
    best = pick_fastest([s.psid for s in specs], pred)
    label = next(s.label for s in specs if s.psid == best)
    emit(args, [("selected_psid", best), ("selected", label)]
         + [(f"{s.psid}:{s.label}", f"{p:.6g}") for s, p in zip(specs, pred)], f"select: {name} on {g.name}")
    return 0


def cmd_evaluate(args) -> int:
    model = EtrmModel.load(args.model)
    rows = _read_logs(args.logs)
    train_graphs = args.train_graphs.split(",") if args.train_graphs else []
    train_algs = args.train_algorithms.split(",") if args.train_algorithms else []
    sels = evaluate_tasks(model, rows, train_graphs, train_algs, args.draws, args.seed)
    path = out_path(args, "selections.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_selections(sels, args.seed))
    n = len({r.psid for r in rows})
    summary = summarize(sels, n)
    summary["seed"] = args.seed
    with open(os.path.splitext(path)[0] + ".summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    a = summary["all"]
    emit(args, [("tasks", a["tasks"]), ("score_best", f"{a['score_best']:.4f}"),
                ("score_worst", f"{a['score_worst']:.4f}"), ("score_avg", f"{a['score_avg']:.4f}"),
                ("random_score_best", f"{a['random_score_best']:.4f}"), ("selections", path)], "evaluate")
    return 0


def cmd_report(args) -> int:
    with open(args.summary, encoding="utf-8") as fh:
        summary = json.load(fh)
    keys = ["tasks", "score_best", "score_worst", "score_avg", "mean_rank", "random_score_best", "random_rank"]
    parts = [p for p in ("all", "held_out", "A", "B", "C", "D") if summary.get(p)]
    print(f"# seed={summary.get('seed', args.seed)}")
    if args.format == "rows":
        print("partition," + ",".join(keys) + ",rank1,rank4")
        for p in parts:
            s = summary[p]
            rc = s["rank_cumulative"]
            print(",".join([p] + [repr(s[k]) for k in keys] + [repr(rc[0]), repr(rc[min(3, len(rc) - 1)])]))
        return 0
    print(f"{'set':9s} " + " ".join(f"{k:>17s}" for k in keys) + f" {'rank1':>7s} {'rank<=4':>7s}")
    for p in parts:
        s = summary[p]
        rc = s["rank_cumulative"]
        cells = [f"{s[k]:17d}" if isinstance(s[k], int) else f"{s[k]:17.4f}" for k in keys]
        print(f"{p:9s} " + " ".join(cells) + f" {rc[0]:7.2f} {rc[min(3, len(rc) - 1)]:7.2f}")
    ref = summary.get("reference_scores")
    if ref:
        print("reference (cluster scale): " + ", ".join(f"{k}={v}" for k, v in ref.items()))
    return 0


# parser ----------------------------------------------------------------------


class _Given(argparse.Action):
    """Store the value and remember that the flag was passed explicitly."""

    def __call__(self, parser, ns, values, option_string=None):
        setattr(ns, self.dest, values)
        setattr(ns, f"{self.dest}_given", True)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="partsel", description="Partitioning-strategy selection toolkit.")
    p.add_argument("--version", action="version", version=f"partsel {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help_, graph=False, fmt=True, out=False):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--seed", type=int, default=0, action=_Given)
        if fmt:
            sp.add_argument("--format", choices=("text", "rows"), default="text")
        if graph:
            sp.add_argument("--graph", required=graph == "required")
            d = sp.add_mutually_exclusive_group()
            d.add_argument("--directed", action="store_true")
            d.add_argument("--undirected", action="store_true")
        if out:
            sp.add_argument("--out", help="output file")
            sp.add_argument("--output-dir", help=f"output directory (default ${OUTPUT_ENV} or .)")
        return sp

    sp = add("ingest", "load an edge list and print its size", graph="required")
    sp.set_defaults(func=cmd_ingest)

    sp = add("features", "print the data feature vector of a graph", graph="required")
    sp.set_defaults(func=cmd_features)

    sp = add("analyze", "count operations in pseudo-code", graph=True)
    sp.add_argument("--code", required=True, help=".gpc file or algorithm name")
    sp.add_argument("--moments", action="store_true", help="value degree powers by raw moments")
    sp.add_argument("--collapsed", action="store_true", help="print the 21 algorithm features")
    sp.set_defaults(func=cmd_analyze)

    sp = add("partition", "partition a graph with one strategy", graph="required", out=True)
    sp.add_argument("--strategy", dest="strategies", required=True, help="name or psid, e.g. HDRF-10 or 3")
    sp.add_argument("--workers", type=int, default=16)
    sp.set_defaults(func=cmd_partition)

    sp = add("run", "execute tasks on one graph, or a whole manifest", graph=True, out=True)
    sp.add_argument("--manifest")
    sp.add_argument("--algorithms", help="comma separated (default all)")
    sp.add_argument("--strategies", help="comma separated names or psids (default all 11)")
    sp.add_argument("--workers", type=int, default=16, action=_Given)
    sp.add_argument("--c-compute", type=float, default=1.0)
    sp.add_argument("--c-msg", type=float, default=10.0)
    sp.add_argument("--c-sync", type=float, default=50.0)
    sp.add_argument("-v", "--verbose", action="store_true")
    sp.set_defaults(func=cmd_run)

    sp = add("augment", "build the synthetic training corpus from logs", out=True)
    sp.add_argument("--logs", nargs="+", required=True)
    sp.add_argument("--algorithms")
    sp.add_argument("--graphs")
    sp.add_argument("--r-min", type=int, default=2)
    sp.add_argument("--r-max", type=int, default=DESK_R_MAX)
    sp.set_defaults(func=cmd_augment)

    sp = add("train", "train the execution time model", out=True)
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--table", help="augmented corpus from `augment`")
    g.add_argument("--logs", nargs="+", help="log tables; augmented on the fly")
    sp.add_argument("--r-min", type=int, default=2)
    sp.add_argument("--r-max", type=int, default=DESK_R_MAX)
    sp.add_argument("--params", help="JSON file of training parameters")
    sp.add_argument("--n-estimators", type=int)
    sp.add_argument("--target", choices=("raw", "log"))
    sp.set_defaults(func=cmd_train)

    sp = add("select", "predict per-strategy time and pick the fastest", graph="required")
    sp.add_argument("--model", required=True)
    sp.add_argument("--code", required=True, help=".gpc file or algorithm name")
    sp.add_argument("--strategies")
    sp.set_defaults(func=cmd_select)

    sp = add("evaluate", "score selections against measured logs", out=True)
    sp.add_argument("--model", required=True)
    sp.add_argument("--logs", nargs="+", required=True)
    sp.add_argument("--train-graphs")
    sp.add_argument("--train-algorithms")
    sp.add_argument("--draws", type=int, default=1000)
    sp.set_defaults(func=cmd_evaluate)

    sp = add("report", "print an evaluation summary")
    sp.add_argument("--summary", required=True, help="summary.json from `run --manifest` or `evaluate`")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    for flag in ("seed", "workers"):
        if not hasattr(args, f"{flag}_given"):
            setattr(args, f"{flag}_given", False)
    try:
        return args.func(args)
    except (CliError, GraphError, GpcError, OSError, ValueError, KeyError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"partsel {args.command}: error: {msg}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
