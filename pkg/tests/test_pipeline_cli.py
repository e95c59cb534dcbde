import json
import os

import pytest

from conftest import random_edges, simple_edges
from partsel import cli
from partsel.pipeline import (LOG_COLUMNS, ManifestError, RunManifest, SchemaError, read_log_table,
                              read_task_table, run_manifest)


def write_graph(path, edges, directed):
    with open(path, "w") as fh:
        fh.write(f"# directed: {'true' if directed else 'false'}\n")
        fh.writelines(f"{u} {v}\n" for u, v in edges)


@pytest.fixture(scope="module")
def tiny(tmp_path_factory):
    d = tmp_path_factory.mktemp("tiny")
    write_graph(d / "a.txt", random_edges(40, 160, 1), True)
    write_graph(d / "b.txt", simple_edges(45, 130, 2), False)
    write_graph(d / "c.txt", random_edges(35, 120, 3), True)
    manifest = {
        "schema": "partsel-manifest/1",
        "name": "tiny",
        "graphs": [
            {"name": "a", "path": "a.txt", "directed": True},
            {"name": "b", "path": "b.txt"},
            {"name": "c", "path": "c.txt", "directed": True, "role": "test"},
        ],
        "train_algorithms": ["AID", "PR", "TC"],
        "test_algorithms": ["CC"],
        "strategies": ["1DSrc", "2D", "HDRF-10", "Ginger"],
        "num_workers": 4,
        "seed": 3,
        "augment": {"r_min": 2, "r_max": 3},
        "train": {"n_estimators": 30},
        "random_draws": 200,
    }
    path = d / "tiny.json"
    path.write_text(json.dumps(manifest))
    return d, path


def test_manifest_validation(tiny, tmp_path):
    d, path = tiny
    m = RunManifest.load(path)
    assert [g.directed for g in m.graphs] == [True, False, True]
    assert m.train_config().seed == 3 and m.train_config().n_estimators == 30
    bad = json.loads(path.read_text())
    bad["graphs"][0]["path"] = "missing.txt"
    with pytest.raises(ManifestError):
        RunManifest.from_dict(bad, str(d))
    bad = json.loads(path.read_text())
    bad["schema"] = "partsel-manifest/0"
    with pytest.raises(SchemaError):
        RunManifest.from_dict(bad, str(d))
    bad = json.loads(path.read_text())
    bad["test_algorithms"] = ["PR"]
    with pytest.raises(ManifestError):
        RunManifest.from_dict(bad, str(d))


def test_run_is_deterministic(tiny, tmp_path):
    _, path = tiny
    m = RunManifest.load(path)
    r1 = run_manifest(m, str(tmp_path / "r1"))
    r2 = run_manifest(m, str(tmp_path / "r2"))
    for key in ("logs", "model", "selections", "summary"):
        a = open(r1.files[key], "rb").read()
        b = open(r2.files[key], "rb").read()
        assert a == b, key
    plans1 = sorted(os.listdir(tmp_path / "r1" / "plans" / "a"))
    assert len(plans1) == 4
    for name in plans1:
        assert (tmp_path / "r1" / "plans" / "a" / name).read_bytes() == \
            (tmp_path / "r2" / "plans" / "a" / name).read_bytes()
    rows, seed = read_log_table(r1.files["logs"])
    assert seed == 3 and len(rows) == 3 * 4 * 4
    with open(r1.files["logs"]) as fh:
        assert fh.readline().startswith("# partsel-log/1 seed=3")
        assert fh.readline().strip().split(",") == LOG_COLUMNS
    assert {s.test_set for s in r1.selections} == {"A", "B", "C", "D"}


def test_log_roundtrip(tiny, tmp_path):
    _, path = tiny
    res = run_manifest(RunManifest.load(path), str(tmp_path / "r"))
    rows, _ = read_log_table(res.files["logs"])
    assert rows == res.rows


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_features_and_analyze(capsys):
    code, out, _ = run_cli(capsys, "features", "--graph", "snap:ego-facebook", "--undirected", "--seed", "4")
    assert code == 0 and "num_vertex" in out and "# seed=4" in out
    code, out, _ = run_cli(capsys, "analyze", "--code", "PR", "--graph", "snap:ego-facebook")
    assert code == 0 and "80780.0" in out and "'all_vertex_list': 21.0" in out


def test_cli_errors(capsys, tmp_path):
    code, _, err = run_cli(capsys, "features", "--graph", str(tmp_path / "none.txt"))
    assert code == 1 and err.count("\n") == 1
    bad = tmp_path / "bad.gpc"
    bad.write_text("for(list v in 5){}")
    code, _, err = run_cli(capsys, "analyze", "--code", bad)
    assert code == 1 and "line 1" in err
    assert run_cli(capsys, "nosuch")[0] == 2
    assert run_cli(capsys, "features", "--graph", "x", "--bogus")[0] == 2


def test_cli_full_chain(capsys, tiny, tmp_path):
    d, _ = tiny
    logs = []
    for g in ("a", "b"):
        out = tmp_path / f"{g}.csv"
        code, _, _ = run_cli(capsys, "run", "--graph", d / f"{g}.txt", "--algorithms", "PR,TC",
                             "--strategies", "0,4,11", "--workers", "4", "--out", out, "--seed", "2")
        assert code == 0
        logs.append(out)
    code, out, _ = run_cli(capsys, "augment", "--logs", *logs, "--r-max", "3", "--out", tmp_path / "aug.csv")
    assert code == 0
    table, seed = read_task_table(tmp_path / "aug.csv")
    assert seed == 0 and len(table) == (3 + 4) * 2 * 3
    code, _, _ = run_cli(capsys, "train", "--table", tmp_path / "aug.csv", "--n-estimators", "20",
                         "--out", tmp_path / "m.json", "--seed", "5")
    assert code == 0
    assert json.loads((tmp_path / "m.json").read_text())["config"]["seed"] == 5
    code, out, _ = run_cli(capsys, "select", "--model", tmp_path / "m.json", "--graph", d / "c.txt",
                           "--code", "CC", "--strategies", "0,4,11")
    assert code == 0 and "selected_psid" in out
    code, out, _ = run_cli(capsys, "evaluate", "--model", tmp_path / "m.json", "--logs", *logs,
                           "--train-graphs", "a", "--train-algorithms", "PR", "--out", tmp_path / "sel.csv")
    assert code == 0
    code, out, _ = run_cli(capsys, "report", "--summary", tmp_path / "sel.summary.json", "--format", "rows")
    assert code == 0 and out.splitlines()[1].startswith("partition,")
    code, out, _ = run_cli(capsys, "partition", "--graph", d / "a.txt", "--strategy", "2D", "--workers", "4",
                           "--out", tmp_path / "p.plan", "--seed", "7")
    assert code == 0 and "# seed=7" in (tmp_path / "p.plan").read_text()


def test_cli_manifest_run(capsys, tiny, tmp_path, monkeypatch):
    _, path = tiny
    monkeypatch.setenv("PARTSEL_OUTPUT_DIR", str(tmp_path / "env"))
    code, out, _ = run_cli(capsys, "run", "--manifest", path, "--seed", "1")
    assert code == 0
    logs = tmp_path / "env" / "tiny" / "logs.csv"
    assert logs.read_text().startswith("# partsel-log/1 seed=1")
    code, out, _ = run_cli(capsys, "report", "--summary", tmp_path / "env" / "tiny" / "summary.json")
    assert code == 0 and "held_out" in out
