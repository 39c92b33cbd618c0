import json
import subprocess
import sys

import pytest

from sheafpairs import cli
from sheafpairs.transform import graph_2c


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_chart_d1_report(capsys):
    code, out, _ = run(["chart", "--d", "1"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["summary"]["fail"] == 0
    labels = {c["label"]: c for c in rep["checks"]}
    fam = labels["chart[d=1] family component smooth of dimension d+2"]
    assert fam["witness"]["dimension"] == 3
    assert labels["chart[d=1] exactly two components"]["verdict"] == "pass"
    assert all(c["anchor"] for c in rep["checks"])
    assert rep["scenario"]["seed"] == 0


def test_inline_scenarios(capsys):
    code, out, _ = run(["run", '{"kind": "ineq", "m_max": 5, "r_max": 5}'], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["summary"] == {"pass": 3, "fail": 0, "inconclusive": 0}
    code, out, _ = run(["run", '{"kind": "choice-dim", "scenario": "2C", "d": 3}'], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["checks"][0]["witness"]["total"] == 5


def test_graph_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    path.write_text(json.dumps(graph_2c(2).to_json()))
    code, out, _ = run(["forward", "--graph", str(path)], capsys)
    assert code == 0 and json.loads(out)["checks"][0]["witness"]["N"] == [2, 1, 0]
    code, out, _ = run(["choice-dim", "--graph", str(path), "--expected", "5"], capsys)
    assert code == 1


def test_byte_identical_reports(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert cli.main(["gamma", "--d", "3", "--seed", "17", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()
    cli.main(["gamma", "--d", "3", "--seed", "17"])
    assert capsys.readouterr().out.encode() == a.read_bytes()


def test_text_format(capsys):
    code, out, _ = run(["transition", "--d", "2", "--format", "text"], capsys)
    assert code == 0 and out.splitlines()[-1] == "pass=3 fail=0 inconclusive=0"


@pytest.mark.parametrize("argv", [
    ["suite", "--d", "3..2"],
    ["run", '{"kind": "chart"'],
    ["run", '{"kind": "nope"}'],
    ["run", '{"kind": "gamma", "d": "two"}'],
    ["choice-dim"],
    ["bogus"],
])
def test_usage_errors(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2 and err


def test_parse_error_has_location(capsys):
    _, _, err = run(["run", '{"kind": "chart",\n "d": }'], capsys)
    assert "line 2" in err


def test_inconclusive_only_exit(capsys):
    code, out, _ = run(["choice-dim", "--scenario", "picard1", "--csq", "2"], capsys)
    assert code == 0
    code, out, _ = run(["run", '{"kind": "choice-dim", "graph": {"nodes": [{"label": "C", "self_int": 3, "mult": 3}]}}'], capsys)
    assert code == 3 and json.loads(out)["summary"]["inconclusive"] == 1


def test_suite_d1(capsys):
    code, out, _ = run(["suite", "--d", "1"], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["summary"]["fail"] == 0
    labels = [c["label"] for c in rep["checks"]]
    assert labels == sorted(labels)


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "sheafpairs.cli", "ineq", "--m-max", "2", "--r-max", "2"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and json.loads(proc.stdout)["summary"]["fail"] == 0
