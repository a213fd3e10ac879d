import csv
import json

import pytest

from hlml.cli import main


def _write(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def _out(capsys):
    return json.loads(capsys.readouterr().out)


def test_run_and_report(tmp_path, capsys):
    spec = _write(tmp_path, "spec.json", {"geometry": "tree", "params": {"q": 2, "depth": 5}, "c": 4,
                                          "strategies": {"random": 3, "search": False}})
    assert main(["run", spec, "--out", str(tmp_path / "runs" / "a")]) == 0
    assert _out(capsys)["status"] == "pass"
    assert main(["report", str(tmp_path / "runs")]) == 0
    assert "tree" in capsys.readouterr().out
    assert (tmp_path / "runs" / "summary.csv").exists()


def test_run_rejects_wrong_constant(tmp_path, capsys):
    spec = _write(tmp_path, "spec.json", {"geometry": "tree", "c": 1})
    assert main(["run", spec]) == 2
    assert "hlml: error" in capsys.readouterr().err


def test_cover_balls(tmp_path, capsys):
    fam = _write(tmp_path, "balls.json", {"balls": [{"center": [0, 0], "radius": 1},
                                                   {"center": [1.2, 0], "radius": 0.5},
                                                   {"center": [5, 5], "radius": 0.2}]})
    assert main(["cover", fam]) == 0
    out = _out(capsys)
    assert out["valid"] and out["chosen"] == [0, 2]


def test_cover_sets(tmp_path, capsys):
    fam = _write(tmp_path, "sets.json", {"sets": [{"id": "A", "members": ["a", "b"], "gauge": "1"},
                                                 {"id": "B", "members": ["b", "c"], "gauge": "1.5"},
                                                 {"id": "C", "members": ["d"]}]})
    assert main(["cover", fam, "--lambda", "2"]) == 0
    out = _out(capsys)
    assert out["chosen"] == ["B", "C"] and out["ignored"] == [] and out["valid"]


def test_whitney(tmp_path, capsys):
    F = _write(tmp_path, "F.json", {"points": [[0, 0]]})
    table = tmp_path / "cubes.csv"
    assert main(["whitney", F, "--window", "0,0", "1,1", "--scales", "-3", "0", "--csv", str(table)]) == 0
    out = _out(capsys)
    assert out["count"] == len(out["cubes"]) > 0
    with open(table) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == out["count"]
    for r in rows:
        side = float(eval(r["side"])) if "/" in r["side"] else float(r["side"])
        assert 2 ** 0.5 * side <= float(r["dist"]) * (1 + 1e-12) <= 4 * 2 ** 0.5 * side * (1 + 1e-12)


def test_whitney_bad_scales(tmp_path, capsys):
    F = _write(tmp_path, "F.json", {"points": [[0, 0]]})
    assert main(["whitney", F, "--window", "0,0", "1,1", "--scales", "0", "-2"]) == 2


def test_hlc(tmp_path, capsys):
    inst = _write(tmp_path, "inst.json", {
        "mode": "exact", "points": [{"id": "a", "w": "1"}, {"id": "b", "w": "1"}],
        "sets": [{"id": "A", "members": ["a"]}, {"id": "B", "members": ["a", "b"]}]})
    assert main(["hlc", inst, "--trials", "3", "--ascent", "5", "--seed", "1"]) == 0
    out = _out(capsys)
    assert out["dyadic_certified"] == 1
    assert float(eval(str(out["lower_bound"]))) <= 1


def test_massdensity(tmp_path, capsys):
    parts = _write(tmp_path, "p.json", {"particles": [{"x": [0, 0, 0], "m": 1}]})
    assert main(["massdensity", parts, "--alpha", "0.5", "--res", "0.1"]) == 0
    out = _out(capsys)
    assert out["volume"] == pytest.approx(8, rel=0.05) and out["within_bound"]


def test_missing_file_and_bad_alpha(tmp_path, capsys):
    assert main(["hlc", str(tmp_path / "nope.json")]) == 2
    parts = _write(tmp_path, "p.json", {"particles": [{"x": [0, 0, 0]}]})
    assert main(["massdensity", parts, "--alpha", "1.2"]) == 2
    assert capsys.readouterr().err.count("hlml: error") == 2


def test_no_subcommand_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
