import json
import subprocess
import sys

import pytest

from netident import cli
from netident.cli import EXIT_DISAGREE, EXIT_PARSE, EXIT_USAGE, REPORT_FORMAT, run
from netident.fixtures import fixture_text
from netident.io import parse_json


def _run(capsys, *argv):
    code = run(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_exit_codes(capsys):
    assert _run(capsys, "check", "fixture:rounds7")[0] == 0
    assert _run(capsys, "check", "fixture:rounds7_partial")[0] == 1
    assert _run(capsys, "check", "fixture:alloc20")[0] == 2


def test_check_text_report(capsys):
    code, out, _ = _run(capsys, "check", "fixture:rounds7", "--method", "iterative")
    assert "round 1: 1->3 2->5 3->6 4->3 4->7 5->7" in out
    assert "round 2: 2->4" in out and "round 3: 2->1" in out
    assert out.rstrip().endswith("overall: identifiable")


def test_check_json_schema(capsys):
    code, out, _ = _run(capsys, "check", "fixture:witness6", "--format", "json")
    rep = json.loads(out)
    assert rep["format"] == REPORT_FORMAT and rep["command"] == "check"
    assert list(rep["methods"]) == ["necessary", "iterative", "vertexwise", "dual", "covering"]
    w = {x["vertex"]: x for x in rep["methods"]["vertexwise"]["witnesses"]}
    assert w["2"]["paths_full"] == 2 and w["2"]["paths_without_vertex"] == 1


def test_check_all_stops_after_necessary_failure(capsys):
    code, out, _ = _run(capsys, "check", "fixture:alloc20", "--format", "json")
    rep = json.loads(out)
    assert code == 2 and list(rep["methods"]) == ["necessary"]


def test_check_tsv(capsys):
    code, out, _ = _run(capsys, "check", "fixture:rounds7", "--format", "tsv", "--method", "iterative")
    rows = [line.split("\t") for line in out.rstrip("\n").splitlines()]
    assert rows[0] == ["method", "item", "verdict", "detail"]
    assert all(len(r) == 4 for r in rows)
    assert ["iterative", "2->1", "identifiable", "round=3"] in rows


def test_check_figure_and_output_file(capsys, tmp_path):
    fig, report = tmp_path / "net.png", tmp_path / "report.txt"
    code, out, _ = _run(capsys, "check", "fixture:trees7", "--figure", str(fig), "-o", str(report))
    assert code == 0 and out == ""
    assert fig.stat().st_size > 1000 and "overall" in report.read_text()


def test_usage_and_parse_errors(capsys, tmp_path):
    assert _run(capsys, "check", str(tmp_path / "missing.net"))[0] == EXIT_USAGE
    assert _run(capsys, "check", "fixture:nope")[0] == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run(["check", "fixture:rounds7", "--method", "magic"])
    assert exc.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as exc:
        run([])
    assert exc.value.code == EXIT_USAGE
    bad = tmp_path / "bad.net"
    bad.write_text("vertices 2\nedge 1 3\n")
    code, _, err = _run(capsys, "check", str(bad))
    assert code == EXIT_PARSE and "line 2" in err
    cyc = tmp_path / "cyc.net"
    cyc.write_text("vertices 2\nedge 1 2\nedge 2 1\n")
    assert _run(capsys, "check", str(cyc))[0] == EXIT_PARSE


def test_stdin_input(monkeypatch, capsys):
    import io

    monkeypatch.setattr(sys, "stdin", io.StringIO(fixture_text("witness6")))
    assert _run(capsys, "check", "-", "--method", "vertexwise")[0] == 0


def test_allocate_round_trip(capsys, tmp_path):
    saved, fig = tmp_path / "alloc.json", tmp_path / "alloc.png"
    code, out, _ = _run(capsys, "allocate", "fixture:alloc20", "--override", "19=measure", "--prune",
                        "--save", str(saved), "--figure", str(fig), "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["pruned"] == ["6", "7"] and rep["trees"] == 7
    assert rep["vertexwise_verdict"] == "identifiable"
    assert parse_json(saved.read_text()).cover is not None and fig.stat().st_size > 1000
    assert _run(capsys, "check", str(saved), "--method", "vertexwise")[0] == 0


def test_allocate_modes_and_bad_overrides(capsys):
    code, out, _ = _run(capsys, "allocate", "fixture:alloc20", "--mode", "antitree", "--prune",
                        "--format", "tsv")
    assert code == 0 and "6\tpruned" in out
    code, out, _ = _run(capsys, "allocate", "fixture:alloc20", "--mode", "best", "--format", "json")
    assert json.loads(out)["mode"] in ("tree", "antitree")
    assert _run(capsys, "allocate", "fixture:alloc20", "--override", "2=measure")[0] == EXIT_USAGE
    assert _run(capsys, "allocate", "fixture:alloc20", "--override", "19")[0] == EXIT_USAGE
    assert _run(capsys, "allocate", "fixture:alloc20", "--override", "99=excite")[0] == EXIT_USAGE


def test_oracle_agrees_on_fixtures(capsys, tmp_path):
    fig = tmp_path / "oracle.png"
    code, out, _ = _run(capsys, "oracle", "fixture:rounds7", "--trials", "2", "--figure", str(fig),
                        "--format", "json")
    rep = json.loads(out)
    assert code == 0 and not rep["disagreements"]
    assert all(r["agree"] for r in rep["rank_vs_paths"])
    assert [r["status"] for r in rep["jacobian"]] == ["full", "full"]
    assert all(r["ok"] for r in rep["reconstruction"]) and fig.stat().st_size > 1000


def test_oracle_seed_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("NETIDENT_SEED", "41")
    code, out, _ = _run(capsys, "oracle", "fixture:witness6", "--trials", "1", "--format", "json")
    assert json.loads(out)["seed"] == 41
    monkeypatch.setenv("NETIDENT_SEED", "forty")
    assert _run(capsys, "oracle", "fixture:witness6")[0] == EXIT_USAGE
    assert _run(capsys, "oracle", "fixture:witness6", "--trials", "0")[0] == EXIT_USAGE


def test_oracle_reports_disagreement(capsys, monkeypatch):
    import netident.oracle as oracle

    real = oracle.jacobian_report

    def deficient(*args, **kwargs):
        rep = real(*args, **kwargs)
        rep.rank -= 1
        return rep

    monkeypatch.setattr(cli, "jacobian_report", deficient)
    code, out, _ = _run(capsys, "oracle", "fixture:rounds7", "--trials", "2")
    assert code == EXIT_DISAGREE and "DISAGREEMENT" in out


def test_export_styles(capsys, tmp_path):
    code, out, _ = _run(capsys, "export", "fixture:rounds7", "--verdict")
    assert code == 0 and 'label="verdict: identifiable"' in out
    target = tmp_path / "g.json"
    assert _run(capsys, "export", "fixture:witness6", "--style", "json", "-o", str(target))[0] == 0
    assert json.loads(target.read_text())["annotations"]["roles"]["2"] == "excited"


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "netident.cli", "check", "fixture:witness6",
                           "--method", "vertexwise"], capture_output=True, text=True)
    assert proc.returncode == 0 and "overall: identifiable" in proc.stdout
