import json
import os

import pytest

from cspdesk.algebra import GroupSpec, coloring_structure, neq_relation
from cspdesk.cli import main
from cspdesk.instances import (Constraint, Instance, encode, plain,
                               relation_to_json, structure_to_json, var_to_json)


def run(args):
    return main(args)


def write(path, text):
    with open(path, "w") as fh:
        fh.write(text)


@pytest.fixture
def triangle_path(tmp_path):
    struct = coloring_structure(3)
    vs = [plain(i) for i in range(3)]
    cons = [Constraint("neq", (vs[i], vs[(i + 1) % 3])) for i in range(3)]
    path = tmp_path / "triangle.json"
    write(path, encode(Instance.make(struct, vs, cons)))
    return str(path)


def test_version_runs():
    with pytest.raises(SystemExit) as e:
        run(["--version"])
    assert e.value.code == 0


def test_unknown_subcommand_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        run(["frobnicate"])
    assert e.value.code == 2


def test_solve_roundtrip(triangle_path, tmp_path):
    out = str(tmp_path / "res.json")
    assert run(["solve", triangle_path, "--out", out]) == 0
    payload = json.load(open(out))
    assert payload["status"] == "SAT"
    assert payload["meta"]["tool"] == "cspdesk"


def test_refuses_overwrite(triangle_path, tmp_path):
    out = str(tmp_path / "res.json")
    assert run(["solve", triangle_path, "--out", out]) == 0
    assert run(["solve", triangle_path, "--out", out]) == 2
    assert run(["solve", triangle_path, "--out", out, "--force"]) == 0


def test_width_subcommand(triangle_path, capsys):
    assert run(["width", triangle_path, "--k", "1", "--l", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["answer"] == "satisfiable"


def test_geiger_subcommand(tmp_path, capsys):
    spath = str(tmp_path / "s.json")
    tpath = str(tmp_path / "t.json")
    write(spath, json.dumps(structure_to_json(coloring_structure(2))))
    write(tpath, json.dumps(relation_to_json(neq_relation(2))))
    assert run(["geiger", "--structure", spath, "--target", tpath]) == 0
    assert json.loads(capsys.readouterr().out)["verified"] is True


def test_pair_sample_deterministic_files(tmp_path):
    a, b = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    args = ["pair", "sample", "--group", "z2", "--n", "4", "--d", "2", "--seed", "7"]
    assert run(args + ["--out", a]) == 0
    assert run(args + ["--out", b]) == 0
    assert open(a).read() == open(b).read()


def test_reduce_pipeline(tmp_path):
    pair = str(tmp_path / "pair.json")
    assert run(["pair", "sample", "--group", "z2", "--n", "2", "--d", "1",
                "--seed", "3", "--out", pair]) == 0
    common = ["--pair", pair, "--l", "1", "--kit-seed", "5"]
    tpath = str(tmp_path / "t.json")
    assert run(["reduce", "transform"] + common + ["--out", tpath]) == 0
    assert run(["reduce", "witness"] + common + ["--out", str(tmp_path / "w.json")]) == 0
    assert run(["reduce", "audit"] + common + ["--out", str(tmp_path / "a.json")]) == 0
    audit = json.load(open(tmp_path / "a.json"))
    assert audit["ok"] is True
    assert json.load(open(tmp_path / "w.json"))["value"] == "1"


def test_reduce_needs_kit_flags(tmp_path):
    pair = str(tmp_path / "pair.json")
    run(["pair", "sample", "--group", "z2", "--n", "2", "--d", "1",
         "--seed", "3", "--out", pair])
    assert run(["reduce", "audit", "--pair", pair]) == 2


def test_hypergraph_sample_and_check(tmp_path, capsys):
    g = str(tmp_path / "g.json")
    assert run(["hypergraph", "sample", "--parts", "2", "--n", "4", "--l", "1",
                "--seed", "2", "--out", g]) == 0
    assert run(["hypergraph", "check-sparsity", "--graph", g, "--delta", "1/2"]) == 0


def test_oracle_replay(triangle_path, tmp_path, capsys):
    qpath = str(tmp_path / "q.json")
    write(qpath, json.dumps([var_to_json(plain(0)), var_to_json(plain(0))]))
    assert run(["oracle", "replay", triangle_path, "--queries", qpath]) == 0
    entries = json.loads(capsys.readouterr().out)["transcript"]
    assert [e["index"] for e in entries] == [0, 2]


def test_experiment_concentration_with_plot(tmp_path):
    csv = str(tmp_path / "c.csv")
    png = str(tmp_path / "c.png")
    out = str(tmp_path / "c.json")
    assert run(["experiment", "concentration", "--group", "z2", "--n", "2",
                "--d", "1", "--seed", "1", "--trials", "4", "--csv", csv,
                "--plot", png, "--out", out]) == 0
    assert open(csv).read().startswith("trial,seed,value")
    assert os.path.getsize(png) > 0


def test_experiment_subinstance(tmp_path, capsys):
    assert run(["experiment", "subinstance", "--group", "z2", "--n", "2",
                "--d", "1", "--seed", "2", "--subset", "0,0;0,1;1,2"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert "tv_distance" in payload


def test_experiment_requires_csv():
    assert run(["experiment", "advantage", "--group", "z2", "--n", "2",
                "--d", "1", "--seed", "1"]) == 2
