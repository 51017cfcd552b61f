import csv
import json
import subprocess
import sys

import pytest

from tsirelson.cli import main


def run(tmp_path, *argv):
    return main([str(a) for a in argv])


def test_derive_X3(tmp_path):
    out = tmp_path / "f.json"
    assert run(tmp_path, "derive", "--A", 2, "--X", 3, "--forbid", "111,222", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert len(doc["facets"]) == 8
    ts = [f for f in doc["facets"] if f["class"] == "tsirelson"]
    assert ts == [
        {"coeffs": [1, 1, 1], "sense": ">=", "bound": 1, "class": "tsirelson"},
        {"coeffs": [1, 1, 1], "sense": "<=", "bound": 2, "class": "tsirelson"},
    ]


def test_derive_triangle(tmp_path, capsys):
    assert run(tmp_path, "derive", "--A", 2, "--X", 2, "--forbid", "11") == 0
    doc = json.loads(capsys.readouterr().out)
    assert [f for f in doc["facets"] if f["class"] == "tsirelson"] == [
        {"coeffs": [1, 1], "sense": "<=", "bound": 1, "class": "tsirelson"}
    ]


def test_derive_from_file(tmp_path):
    src = tmp_path / "s.json"
    src.write_text(json.dumps({"A": 2, "X": 3, "forbidden": [[1, 1, 1]]}))
    out = tmp_path / "f.json"
    assert run(tmp_path, "derive", "--scenario", src, "--out", out) == 0
    assert json.loads(out.read_text())["n_vertices"] == 7


def test_derive_oscillator(tmp_path):
    out = tmp_path / "f.json"
    assert run(tmp_path, "derive", "--oscillator", 5, "--mode", "full", "--out", out) == 0
    facets = {(tuple(f["coeffs"]), f["sense"], f["bound"]) for f in json.loads(out.read_text())["facets"]}
    assert ((1, 0, 1, 0, 1), "<=", 2) in facets
    assert ((1, -1, 1, 0, 0), ">=", 0) in facets


@pytest.mark.parametrize(
    "argv",
    [
        ["derive", "--A", 2, "--X", 3, "--forbid", "131"],
        ["derive", "--A", 2, "--X", 3, "--oscillator", 3],
        ["derive"],
        ["oscillator", "--X", 4, "--Nmax", 3],
    ],
)
def test_invalid_exit_2(tmp_path, argv):
    assert run(tmp_path, *argv) == 2


def test_bad_scenario_file(tmp_path):
    src = tmp_path / "s.json"
    src.write_text("{not json")
    assert run(tmp_path, "derive", "--scenario", src) == 2
    src.write_text(json.dumps({"A": 2, "X": 3, "forbidden": [[1, 1]]}))
    assert run(tmp_path, "derive", "--scenario", src) == 2


def test_dimension_cap_exit_3(tmp_path):
    assert run(tmp_path, "derive", "--A", 2, "--X", 9, "--forbid", "111111111") == 3


def test_oscillator_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert run(tmp_path, "oscillator", "--X", 5, "--Nmax", 6, "--out", out) == 0
    rows = list(csv.DictReader(out.open()))
    assert list(rows[0]) == ["N", "type", "bound_side", "value", "violated"]
    got = {(r["N"], r["type"], r["bound_side"]): r for r in rows}
    assert abs(float(got["6", "type_t", "upper"]["value"]) - 3.046) <= 0.002
    assert got["5", "type_t", "upper"]["violated"] == "false"
    assert got["5", "type_1", "upper"]["violated"] == "true"


def test_oscillator_ground_state(tmp_path):
    out = tmp_path / "s.csv"
    assert run(tmp_path, "oscillator", "--X", 5, "--Nmax", 1, "--out", out) == 0
    for r in csv.DictReader(out.open()):
        assert r["violated"] == "false"
        expect = {"type_t": 2.5, "type_1": 1.5, "type_2": 0.5}[r["type"]]
        assert float(r["value"]) == pytest.approx(expect)


def test_oscillator_json_selector(tmp_path):
    out = tmp_path / "s.json"
    assert run(tmp_path, "oscillator", "--X", 5, "--Nmax", 3, "--ineq", "type_2", "--format", "json", "--out", out) == 0
    doc = json.loads(out.read_text())
    assert {d["type"] for d in doc} == {"type_2"} and len(doc) == 6
    assert {"inequality", "N", "value", "bound", "violated", "state_re", "state_im"} <= set(doc[0])


def test_shellgame_pipeline(tmp_path):
    log = tmp_path / "t.csv"
    rep = tmp_path / "r.json"
    assert run(tmp_path, "shellgame-simulate", "--strategy", "cheat_remove", "--rounds", 300, "--seed", 7, "--out", log) == 0
    assert run(tmp_path, "shellgame-analyze", "--in", log, "--confidence", 0.99, "--seed", 7, "--out", rep) == 10
    doc = json.loads(rep.read_text())
    assert doc["verdict"] == "cheating_detected" and doc["seed"] == 7

    assert run(tmp_path, "shellgame-simulate", "--strategy", "honest_uniform", "--rounds", 300, "--seed", 7, "--out", log) == 0
    assert run(tmp_path, "shellgame-analyze", "--in", log, "--out", rep) == 0


def test_analyze_missing_cup(tmp_path):
    log = tmp_path / "t.csv"
    log.write_text("round,x,outcome\n1,1,found\n2,2,empty\n")
    assert run(tmp_path, "shellgame-analyze", "--in", log) == 2


def test_analyze_malformed_line(tmp_path, capsys):
    log = tmp_path / "t.csv"
    log.write_text("round,x,outcome\n1,1,found\n2,2,purple\n")
    assert run(tmp_path, "shellgame-analyze", "--in", log) == 2
    assert "line 3" in capsys.readouterr().err


def test_bad_confidence(tmp_path):
    with pytest.raises(SystemExit) as info:
        run(tmp_path, "shellgame-analyze", "--in", "x.csv", "--confidence", 1.5)
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    out = tmp_path / "f.json"
    proc = subprocess.run(
        [sys.executable, "-m", "tsirelson", "derive", "--A", "2", "--X", "2", "--forbid", "11", "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "tsirelson  p(1|1) + p(1|2) <= 1" in proc.stdout
