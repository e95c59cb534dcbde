"""End-to-end desk pipeline driven by a JSON run manifest.

Stages: ingest graphs, extract data features, analyze pseudo-code,
partition, execute every (graph, algorithm, strategy) task, augment the
training logs, train the model, then select and score on every task.

All files written here are deterministic for a given manifest and seed,
except ``timing.json`` which records wall-clock selection costs.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .algorithms import ALGORITHM_NAMES, HELD_OUT_ALGORITHMS, TRAINING_ALGORITHMS, pseudocode_source, run_algorithm
from .augment import DESK_R_MAX, TaskRecord, TaskTable, augment
from .datasets import bundled_path, read_direction
from .dsl_analyzer import AlgorithmFeatureVector, count_ops, evaluate, parse
from .etrm import EtrmModel, TrainConfig, train
from .evaluator import (bc_report, compute_scores, expected_random_scores, pick_fastest, random_baseline,
                        rank_cumulative, test_set)
from .features import ALGO_FEATURES, DATA_FEATURES, ENCODED_FIELDS, DataFeatureVector, ScalerParams, extract_data_features
from .gas_engine import CostModel
from .graph_core import Graph, load_edge_list
from .partitioners import StrategySpec, default_strategies, parse_strategies, partition

MANIFEST_SCHEMA = "partsel-manifest/1"
LOG_SCHEMA = "partsel-log/1"
SELECTION_SCHEMA = "partsel-selection/1"
OUTPUT_ENV = "PARTSEL_OUTPUT_DIR"

# reference values reported next to desk results (not targets)
REFERENCE_SCORES = {"score_best": 0.9458, "score_avg": 1.4558, "rank1_fraction": 0.52, "rank4_fraction": 0.92}


class ManifestError(ValueError):
    pass


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class GraphEntry:
    name: str
    path: str
    directed: bool
    role: str = "train"  # train or test

    def resolve(self, base_dir: str = ".") -> str:
        if self.path.startswith("bundled:"):
            return bundled_path(self.path.split(":", 1)[1])
        return self.path if os.path.isabs(self.path) else os.path.normpath(os.path.join(base_dir, self.path))

    def load(self, base_dir: str = ".") -> Graph:
        return load_edge_list(self.resolve(base_dir), directed=self.directed, name=self.name)


@dataclass
class RunManifest:
    name: str
    graphs: list
    train_algorithms: list = field(default_factory=lambda: list(TRAINING_ALGORITHMS))
    test_algorithms: list = field(default_factory=lambda: list(HELD_OUT_ALGORITHMS))
    strategies: list = field(default_factory=lambda: [s.label for s in default_strategies()])
    num_workers: int = 16
    cost: CostModel = field(default_factory=CostModel)
    seed: int = 0
    r_min: int = 2
    r_max: int = DESK_R_MAX
    train: dict = field(default_factory=dict)
    random_draws: int = 1000
    output_dir: str | None = None
    base_dir: str = "."

    @classmethod
    def from_dict(cls, d: dict, base_dir: str = ".") -> "RunManifest":
        if d.get("schema") != MANIFEST_SCHEMA:
            raise SchemaError(f"manifest schema {d.get('schema')!r} is not {MANIFEST_SCHEMA!r}")
        known = {"schema", "name", "graphs", "train_algorithms", "test_algorithms", "strategies",
                 "num_workers", "cost", "seed", "augment", "train", "random_draws", "output_dir"}
        extra = set(d) - known
        if extra:
            raise ManifestError(f"unknown manifest keys: {sorted(extra)}")
        graphs = []
        for g in d["graphs"]:
            directed = g.get("directed")
            entry = GraphEntry(g["name"], g["path"], bool(directed), g.get("role", "train"))
            if directed is None:
                entry = GraphEntry(entry.name, entry.path, bool(read_direction(entry.resolve(base_dir))), entry.role)
            graphs.append(entry)
        aug = d.get("augment", {})
        m = cls(
            name=d["name"],
            graphs=graphs,
            train_algorithms=list(d.get("train_algorithms", TRAINING_ALGORITHMS)),
            test_algorithms=list(d.get("test_algorithms", HELD_OUT_ALGORITHMS)),
            strategies=list(d.get("strategies", [s.label for s in default_strategies()])),
            num_workers=int(d.get("num_workers", 16)),
            cost=CostModel(**d.get("cost", {})),
            seed=int(d.get("seed", 0)),
            r_min=int(aug.get("r_min", 2)),
            r_max=int(aug.get("r_max", DESK_R_MAX)),
            train=dict(d.get("train", {})),
            random_draws=int(d.get("random_draws", 1000)),
            output_dir=d.get("output_dir"),
            base_dir=base_dir,
        )
        m.validate()
        return m

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh), os.path.dirname(os.path.abspath(path)))

    def to_dict(self) -> dict:
        return {
            "schema": MANIFEST_SCHEMA,
            "name": self.name,
            "graphs": [asdict(g) for g in self.graphs],
            "train_algorithms": self.train_algorithms,
            "test_algorithms": self.test_algorithms,
            "strategies": self.strategies,
            "num_workers": self.num_workers,
            "cost": asdict(self.cost),
            "seed": self.seed,
            "augment": {"r_min": self.r_min, "r_max": self.r_max},
            "train": self.train,
            "random_draws": self.random_draws,
            "output_dir": self.output_dir,
        }

    def validate(self) -> None:
        names = [g.name for g in self.graphs]
        if len(set(names)) != len(names):
            raise ManifestError("graph names must be unique")
        for g in self.graphs:
            if g.role not in ("train", "test"):
                raise ManifestError(f"graph {g.name}: role must be train or test")
            path = g.resolve(self.base_dir)
            if not os.path.isfile(path):
                raise ManifestError(f"graph {g.name}: file not found: {path}")
        if not any(g.role == "train" for g in self.graphs):
            raise ManifestError("manifest has no training graph")
        for a in self.train_algorithms + self.test_algorithms:
            if a not in ALGORITHM_NAMES:
                raise ManifestError(f"unknown algorithm {a!r}")
        if set(self.train_algorithms) & set(self.test_algorithms):
            raise ManifestError("an algorithm cannot be both training and held out")
        self.strategy_specs()
        self.train_config()

    def strategy_specs(self) -> list[StrategySpec]:
        return parse_strategies(self.strategies, seed=self.seed)

    def train_config(self) -> TrainConfig:
        return TrainConfig(**{"seed": self.seed, **self.train})

    @property
    def algorithms(self) -> list[str]:
        return [a for a in ALGORITHM_NAMES if a in self.train_algorithms + self.test_algorithms]


# log table -------------------------------------------------------------------

LOG_COLUMNS = (
    ["graph", "algorithm", "psid", "strategy", "num_workers", "exec_time", "message_count", "superstep_count"]
    + [f"df.{n}" for n in DATA_FEATURES]
    + [f"af.{n}" for n in ALGO_FEATURES]
)


@dataclass(frozen=True)
class LogRow:
    graph: str
    algorithm: str
    psid: int
    strategy: str
    num_workers: int
    exec_time: float
    message_count: int
    superstep_count: int
    df: DataFeatureVector
    af: AlgorithmFeatureVector

    def cells(self) -> list[str]:
        return ([self.graph, self.algorithm, str(self.psid), self.strategy, str(self.num_workers),
                 repr(float(self.exec_time)), str(self.message_count), str(self.superstep_count)]
                + [repr(float(x)) for x in self.df.as_row()]
                + [repr(float(x)) for x in self.af.as_list()])

    def task_record(self) -> TaskRecord:
        return TaskRecord(self.graph, self.algorithm, self.psid, self.df, self.af, self.exec_time)


def format_log_table(rows: Iterable[LogRow], seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# {LOG_SCHEMA} seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LOG_COLUMNS)
    for r in rows:
        w.writerow(r.cells())
    return buf.getvalue()


def write_log_table(path, rows: Iterable[LogRow], seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_log_table(rows, seed))


def _df_from_cells(vals: Sequence[float]) -> DataFeatureVector:
    v = list(vals)
    ints = {0, 1, 5, 7, 11, 13}
    args = [int(x) if k in ints else float(x) for k, x in enumerate(v[:14])]
    return DataFeatureVector(*args, directed=bool(v[14]))


def read_log_table(path) -> tuple[list[LogRow], int]:
    with open(path, encoding="utf-8", newline="") as fh:
        head = fh.readline().strip()
        if not head.startswith(f"# {LOG_SCHEMA}"):
            raise SchemaError(f"{path}: expected a {LOG_SCHEMA} log table")
        seed = int(head.split("seed=", 1)[1]) if "seed=" in head else 0
        reader = csv.reader(fh)
        cols = next(reader)
        if tuple(cols) != tuple(LOG_COLUMNS):
            raise SchemaError(f"{path}: unexpected column layout")
        rows = []
        n_df = len(DATA_FEATURES)
        for c in reader:
            df = _df_from_cells([float(x) for x in c[8:8 + n_df]])
            af = AlgorithmFeatureVector([float(x) for x in c[8 + n_df:]])
            rows.append(LogRow(c[0], c[1], int(c[2]), c[3], int(c[4]), float(c[5]), int(c[6]), int(c[7]), df, af))
    return rows, seed


# stages ----------------------------------------------------------------------


def algorithm_features(algorithms: Iterable[str], df: DataFeatureVector) -> dict[str, AlgorithmFeatureVector]:
    return {a: evaluate(count_ops(parse(pseudocode_source(a))), df) for a in algorithms}


def algorithm_params(name: str, seed: int) -> dict:
    return {"seed": seed} if name == "RW" else {}


def plan_text(plan, seed: int) -> str:
    """Plan serialization with the run seed as a comment after the format line."""
    head, rest = plan.dumps().split("\n", 1)
    return f"{head}\n# seed={seed}\n{rest}"


def write_plan(path, plan, seed: int) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(plan_text(plan, seed))


def run_graph(g: Graph, algorithms: Sequence[str], strategies: Sequence[StrategySpec], num_workers: int,
              cost: CostModel, seed: int, plan_dir: str | None = None, progress=None) -> list[LogRow]:
    """Execute every (algorithm, strategy) task on one graph."""
    df = extract_data_features(g)
    afs = algorithm_features(algorithms, df)
    rows = []
    for spec in strategies:
        plan = partition(g, spec, num_workers)
        if plan_dir is not None:
            os.makedirs(plan_dir, exist_ok=True)
            write_plan(os.path.join(plan_dir, f"{spec.psid:02d}-{spec.label}.plan"), plan, seed)
        for a in algorithms:
            _, log = run_algorithm(a, g, plan, cost, **algorithm_params(a, seed))
            rows.append(LogRow(g.name, a, spec.psid, spec.label, num_workers, float(log.execution_time),
                               log.message_count, log.superstep_count, df, afs[a]))
            if progress:
                progress(f"{g.name} {a} {spec.label} {log.execution_time:.0f}")
    rows.sort(key=lambda r: (r.graph, ALGORITHM_NAMES.index(r.algorithm), r.psid))
    return rows


def training_table(rows: Sequence[LogRow], graphs: Iterable[str], algorithms: Iterable[str],
                   r_min: int, r_max: int) -> TaskTable:
    gs, als = set(graphs), set(algorithms)
    real = [r.task_record() for r in rows if r.graph in gs and r.algorithm in als]
    return augment(real, als, r_min, r_max)


def fit_model(table: TaskTable, cfg: TrainConfig) -> EtrmModel:
    raw = table.raw_matrix()
    scaler = ScalerParams.fit(raw)
    X = scaler.transform(raw)
    return train(X, table.exec_time, cfg, scaler=scaler, feature_names=ENCODED_FIELDS)


@dataclass(frozen=True)
class Selection:
    graph: str
    algorithm: str
    test_set: str
    selected: int
    predicted: tuple
    actual: tuple
    scores: object  # ScoreRow
    random: dict


def evaluate_tasks(model: EtrmModel, rows: Sequence[LogRow], train_graphs, train_algorithms,
                   draws: int = 1000, seed: int = 0) -> list[Selection]:
    tasks: dict[tuple, list[LogRow]] = {}
    for r in rows:
        tasks.setdefault((r.graph, r.algorithm), []).append(r)
    out = []
    for k, ((gname, alg), rs) in enumerate(sorted(tasks.items())):
        rs = sorted(rs, key=lambda r: r.psid)
        raw = np.vstack([r.task_record().raw_row() for r in rs])
        pred = np.atleast_1d(model.predict_raw(raw))
        psids = [r.psid for r in rs]
        sel = pick_fastest(psids, pred.tolist())
        times = {r.psid: r.exec_time for r in rs}
        out.append(Selection(gname, alg, test_set(gname, alg, train_graphs, train_algorithms), sel,
                             tuple(float(x) for x in pred), tuple(times[p] for p in psids),
                             compute_scores(times, sel), random_baseline(times, draws, seed + k)))
    return out


SELECTION_COLUMNS = ["graph", "algorithm", "test_set", "selected", "rank", "t_sel", "t_best", "t_worst", "t_avg",
                     "score_best", "score_worst", "score_avg", "random_score_best", "random_rank"]


def format_selections(sels: Sequence[Selection], seed: int) -> str:
    buf = io.StringIO()
    buf.write(f"# {SELECTION_SCHEMA} seed={seed}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SELECTION_COLUMNS)
    for s in sels:
        sc = s.scores
        w.writerow([s.graph, s.algorithm, s.test_set, s.selected, sc.rank, repr(sc.t_sel), repr(sc.t_best),
                    repr(sc.t_worst), repr(sc.t_avg), repr(sc.score_best), repr(sc.score_worst),
                    repr(sc.score_avg), repr(s.random["score_best"]), repr(s.random["rank"])])
    return buf.getvalue()


def summarize(sels: Sequence[Selection], n_strategies: int) -> dict:
    def agg(group):
        if not group:
            return None
        ranks = [s.scores.rank for s in group]
        exp = [expected_random_scores(dict(zip(range(len(s.actual)), s.actual))) for s in group]
        return {
            "tasks": len(group),
            "score_best": float(np.mean([s.scores.score_best for s in group])),
            "score_worst": float(np.mean([s.scores.score_worst for s in group])),
            "score_avg": float(np.mean([s.scores.score_avg for s in group])),
            "mean_rank": float(np.mean(ranks)),
            "rank_cumulative": rank_cumulative(ranks, n_strategies),
            "random_score_best": float(np.mean([s.random["score_best"] for s in group])),
            "random_score_worst": float(np.mean([s.random["score_worst"] for s in group])),
            "random_score_avg": float(np.mean([s.random["score_avg"] for s in group])),
            "random_rank": float(np.mean([s.random["rank"] for s in group])),
            "expected_random_score_best": float(np.mean([e["score_best"] for e in exp])),
        }

    out = {"all": agg(list(sels)), "held_out": agg([s for s in sels if s.test_set != "D"])}
    for letter in "ABCD":
        out[letter] = agg([s for s in sels if s.test_set == letter])
    out["reference_scores"] = REFERENCE_SCORES
    return out


@dataclass
class RunResult:
    manifest: RunManifest
    output_dir: str
    rows: list
    model: EtrmModel
    selections: list
    summary: dict
    files: dict


def default_output_dir(manifest: RunManifest) -> str:
    if manifest.output_dir:
        return manifest.output_dir if os.path.isabs(manifest.output_dir) else os.path.join(
            manifest.base_dir, manifest.output_dir)
    return os.path.join(os.environ.get(OUTPUT_ENV, "partsel-out"), manifest.name)


def run_manifest(manifest: RunManifest, output_dir: str | None = None, progress=None) -> RunResult:
    out = output_dir or default_output_dir(manifest)
    os.makedirs(out, exist_ok=True)
    files = {}
    strategies = manifest.strategy_specs()
    algorithms = manifest.algorithms
    rows: list[LogRow] = []
    timing = {}
    for entry in manifest.graphs:
        g = entry.load(manifest.base_dir)
        rows.extend(run_graph(g, algorithms, strategies, manifest.num_workers, manifest.cost, manifest.seed,
                              os.path.join(out, "plans", entry.name), progress))
        t0 = time.perf_counter()
        df = extract_data_features(g)
        t1 = time.perf_counter()
        algorithm_features(algorithms, df)
        t2 = time.perf_counter()
        timing[entry.name] = {"feature_s": t1 - t0, "analysis_s": (t2 - t1) / max(1, len(algorithms))}
    files["logs"] = os.path.join(out, "logs.csv")
    write_log_table(files["logs"], rows, manifest.seed)

    train_graphs = [g.name for g in manifest.graphs if g.role == "train"]
    table = training_table(rows, train_graphs, manifest.train_algorithms, manifest.r_min, manifest.r_max)
    if progress:
        progress(f"training on {len(table)} synthetic records")
    model = fit_model(table, manifest.train_config())
    files["model"] = os.path.join(out, "model.json")
    model.save(files["model"])

    sels = evaluate_tasks(model, rows, train_graphs, manifest.train_algorithms, manifest.random_draws,
                          manifest.seed)
    files["selections"] = os.path.join(out, "selections.csv")
    with open(files["selections"], "w", encoding="utf-8", newline="") as fh:
        fh.write(format_selections(sels, manifest.seed))
    summary = summarize(sels, len(strategies))
    summary["seed"] = manifest.seed
    summary["training_records"] = len(table)
    files["summary"] = os.path.join(out, "summary.json")
    with open(files["summary"], "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")

    # wall-clock benefit-cost, kept apart from the deterministic outputs
    by_task: dict[tuple, list[LogRow]] = {}
    for r in rows:
        by_task.setdefault((r.graph, r.algorithm), []).append(r)
    bc = []
    for s in sels:
        raw = np.vstack([r.task_record().raw_row() for r in by_task[(s.graph, s.algorithm)]])
        t0 = time.perf_counter()
        model.predict_raw(raw)
        pt = time.perf_counter() - t0
        tm = timing[s.graph]
        rep = bc_report(s.scores.t_worst, s.scores.t_sel, tm["feature_s"], tm["analysis_s"], pt)
        bc.append({"graph": s.graph, "algorithm": s.algorithm, **asdict(rep)})
    files["timing"] = os.path.join(out, "timing.json")
    with open(files["timing"], "w", encoding="utf-8") as fh:
        json.dump({"version": __version__, "bc": bc, "features": timing}, fh, indent=2)
        fh.write("\n")
    return RunResult(manifest, out, rows, model, sels, summary, files)


# augmented corpus ----------------------------------------------------------------

TABLE_SCHEMA = "partsel-augment/1"
TABLE_COLUMNS = (["graph", "algorithms", "psid", "exec_time"] + [f"df.{n}" for n in DATA_FEATURES]
                 + [f"af.{n}" for n in ALGO_FEATURES])


def write_task_table(path, table: TaskTable, seed: int) -> None:
    df_cells = {g: [repr(float(x)) for x in df.as_row()] for g, df in table.dfs.items()}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {TABLE_SCHEMA} seed={seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for i in range(len(table)):
            g = table.graph[i]
            a = table.algorithm[i]
            tag = "+".join(a) if isinstance(a, tuple) else a
            w.writerow([g, tag, int(table.psid[i]), repr(float(table.exec_time[i]))] + df_cells[g]
                       + [repr(float(x)) for x in table.af[i]])


def read_task_table(path) -> tuple[TaskTable, int]:
    with open(path, encoding="utf-8", newline="") as fh:
        head = fh.readline().strip()
        if not head.startswith(f"# {TABLE_SCHEMA}"):
            raise SchemaError(f"{path}: expected a {TABLE_SCHEMA} table")
        seed = int(head.split("seed=", 1)[1]) if "seed=" in head else 0
        reader = csv.reader(fh)
        if tuple(next(reader)) != tuple(TABLE_COLUMNS):
            raise SchemaError(f"{path}: unexpected column layout")
        graphs, algs, psids, times, afs, dfs = [], [], [], [], [], {}
        n_df = len(DATA_FEATURES)
        for c in reader:
            g = c[0]
            graphs.append(g)
            algs.append(tuple(c[1].split("+")) if "+" in c[1] else c[1])
            psids.append(int(c[2]))
            times.append(float(c[3]))
            if g not in dfs:
                dfs[g] = _df_from_cells([float(x) for x in c[4:4 + n_df]])
            afs.append([float(x) for x in c[4 + n_df:]])
    af = np.array(afs, dtype=np.float64).reshape(len(afs), len(ALGO_FEATURES))
    return TaskTable(graphs, algs, np.array(psids, dtype=np.int64), af, np.array(times), dfs), seed
