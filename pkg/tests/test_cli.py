import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from agcolor.cli import fit_rounds, main
from agcolor.scenario import ScenarioError, parse_scenario, run_scenario

ROOT = Path(__file__).resolve().parents[1]
SCEN = ROOT / "scenarios"


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bundled_triangle_scenario(tmp_path, capsys):
    code, out, _ = run_cli(["run", "--scenario", SCEN / "k3-ag.yaml", "--out", tmp_path], capsys)
    assert code == 0
    assert "proper every round: yes" in out
    trace = (tmp_path / "k3-ag.jsonl").read_text().splitlines()
    assert json.loads(trace[0])["header"]["problem"] == "coloring"
    rows = list(csv.DictReader(open(tmp_path / "k3-ag.csv")))
    assert rows[0]["algorithm"] == "ag" and rows[0]["palette"] == "3"


def test_runs_are_byte_identical(tmp_path, capsys):
    for sub in ("a", "b"):
        assert run_cli(["run", "--scenario", SCEN / "ss-mis-churn.yaml", "--out", tmp_path / sub],
                       capsys)[0] == 0
    a = (tmp_path / "a" / "ss-mis-churn.jsonl").read_bytes()
    assert a == (tmp_path / "b" / "ss-mis-churn.jsonl").read_bytes()


def _corrupt_trace(src, dst, edit):
    lines = src.read_text().splitlines()
    head = json.loads(lines[0])
    recs = [json.loads(x) for x in lines[1:]]
    edit(head["header"], recs)
    dst.write_text("\n".join([json.dumps(head)] + [json.dumps(r) for r in recs]) + "\n")


def test_verify_catches_tampering(tmp_path, capsys):
    run_cli(["run", "--scenario", SCEN / "k3-ag.yaml", "--out", tmp_path], capsys)
    good = tmp_path / "k3-ag.jsonl"
    assert run_cli(["verify", "--trace", good], capsys)[0] == 0

    def clash(h, recs):
        recs[2]["outputs"]["1"] = recs[2]["outputs"]["0"]

    bad = tmp_path / "bad.jsonl"
    _corrupt_trace(good, bad, clash)
    code, out, _ = run_cli(["verify", "--trace", bad], capsys)
    assert code == 3 and "proper every round: no" in out

    def tight(h, recs):
        h["rounds_max"] = 2

    _corrupt_trace(good, bad, tight)
    assert run_cli(["verify", "--trace", bad], capsys)[0] == 2

    bad.write_text("{not json\n")
    assert run_cli(["verify", "--trace", bad], capsys)[0] == 4


def test_verify_rejects_disagreeing_edge_views(tmp_path, capsys):
    sc = tmp_path / "e.yaml"
    sc.write_text("name: e\ngraph: {kind: complete, n: 4}\nalgorithm: edge-3ag\n")
    assert run_cli(["run", "--scenario", sc, "--out", tmp_path], capsys)[0] == 0

    def split(h, recs):
        recs[-1]["outputs"]["0"]["1"] = 99

    bad = tmp_path / "bad.jsonl"
    _corrupt_trace(tmp_path / "e.jsonl", bad, split)
    assert run_cli(["verify", "--trace", bad], capsys)[0] == 3


@pytest.mark.parametrize("text,line", [
    ("name: x\ngraph: {kind: path, n: 3}\nalgorithm: ag\ncolour: red\n", 4),
    ("name: x\ngraph:\n  kind: path\n  n: [3\nalgorithm: ag\n", 5),
    ("name: x\ngraph:\n  kind: blob\n  n: 3\nalgorithm: ag\n", 3),
    ("name: x\ngraph: {kind: path, n: 3}\nalgorithm: ag\nmodel: congest\n", 4),
    ("name: x\ngraph: {kind: path, n: 3}\nalgorithm: nope\n", 3),
])
def test_scenario_errors_name_the_line(tmp_path, capsys, text, line):
    f = tmp_path / "s.yaml"
    f.write_text(text)
    code, _, err = run_cli(["run", "--scenario", f, "--out", tmp_path], capsys)
    assert code == 4
    assert f"line {line}:" in err


def test_faults_only_for_self_stabilizing():
    sc = parse_scenario("graph: {kind: path, n: 3}\nalgorithm: ag\nfaults:\n  - {round: 1, corrupt: 0, value: 3}\n")
    with pytest.raises(ScenarioError):
        run_scenario(sc)


def test_explicit_fault_events():
    sc = parse_scenario("""
graph: {kind: path, n: 4, n_bound: 6}
algorithm: ss-coloring
faults:
  - {round: 2, corrupt: 1, value: 4}
  - {round: 3, topology: add-vertex, payload: 5}
  - {round: 3, topology: add-edge, payload: [3, 5]}
""")
    out = run_scenario(sc)
    assert out.trace.fault_rounds == [2, 3]
    assert out.trace.final_graph.has_edge(3, 5)


def test_sweep_and_report(tmp_path, capsys):
    grid = tmp_path / "grid.yaml"
    grid.write_text("algorithms: [ag, exact]\nn: [40]\ndelta: [2, 4, 8]\nseeds: [0, 1]\n")
    code, out, _ = run_cli(["sweep", "--grid", grid, "--out", tmp_path / "sw", "--jobs", 2], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "sw" / "summary.csv")))
    assert len(rows) == 12
    assert list(rows[0]) == ["scenario", "algorithm", "n", "delta", "rounds", "bit_rounds", "stab_rounds",
                             "palette", "adj_radius", "max_bits_per_edge"]
    code, out, _ = run_cli(["report", "--in", tmp_path / "sw"], capsys)
    assert code == 0 and out.startswith("algorithm,runs,alpha,beta,gamma")
    assert len(out.strip().splitlines()) == 3


def test_ag_sweep_fits_linear_form(tmp_path, capsys):
    code, _, _ = run_cli(["sweep", "--grid", SCEN / "ag-grid.yaml", "--out", tmp_path, "--jobs", 1], capsys)
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "summary.csv")))
    assert sorted({int(r["delta"]) for r in rows}) == [2, 4, 8, 16]
    coef, resid = fit_rounds(rows)
    # rounds grow linearly in delta; the fit explains them to within a few rounds
    assert coef[0] > 0 and resid <= 0.15 * max(int(r["rounds"]) for r in rows)


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "agcolor", "run", "--scenario", str(SCEN / "k3-ag.yaml"),
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "proper every round: yes" in proc.stdout
