import csv
import json
import subprocess
import sys

import pytest

from ldsda import cli
from ldsda.report import RunReport, lattice_csv, load_report
from ldsda.search import LatticeRow


def run(args, capsys):
    code = cli.run(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_cstr_reports_certificate(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["solve", "--model", "cstr", "--size", "3", "--start", "1,1",
                      "--neighborhood", "inf", "--out", str(out)], capsys)
    assert code == 0
    rep = load_report(out)
    assert rep.certificate == "i-local" and rep.z == (3, 3)
    assert rep.counters["solves"] == sum(
        1 for e in rep.trajectory if e["status"] in ("optimal", "infeasible", "solver_error"))
    accepted = [e["value"] for e in rep.trajectory if e["accepted"]]
    assert all(b < a for a, b in zip(accepted, accepted[1:]))
    assert "wall_time" not in rep.extra and all("elapsed" not in e for e in rep.trajectory)


def test_timing_flag_adds_fields(capsys):
    code, text, _ = run(["solve", "--model", "cstr", "--size", "2", "--timing"], capsys)
    rep = json.loads(text)
    assert code == 0 and "wall_time" in rep["extra"]
    assert all("elapsed" in e for e in rep["trajectory"])


def test_enumerate_smallbatch(tmp_path, capsys):
    out = tmp_path / "t.csv"
    assert run(["enumerate", "--model", "smallbatch", "--out", str(out)], capsys)[0] == 0
    rows = list(csv.reader(out.open(encoding="utf-8")))
    assert rows[0] == ["z_1", "z_2", "z_3", "status", "objective"]
    assert len(rows) == 28
    assert out.read_bytes().endswith(b"\n")


def test_enumerate_cstr_csv(capsys):
    code, text, _ = run(["enumerate", "--model", "cstr", "--size", "3"], capsys)
    rows = list(csv.DictReader(text.splitlines()))
    assert code == 0 and len(rows) == 9
    logic = [r for r in rows if r["status"] == "LOGIC_INFEASIBLE"]
    assert len(logic) == 3 and all(r["objective"] == "" for r in logic)
    assert [(r["z_1"], r["z_2"]) for r in rows] == sorted((r["z_1"], r["z_2"]) for r in rows)


def test_one_point_csv():
    text = lattice_csv([LatticeRow((1,), "optimal", 2.5)])
    assert text == "z_1,status,objective\n1,OPTIMAL,2.5\n"
    with pytest.raises(ValueError):
        lattice_csv([])


@pytest.mark.parametrize("args", [
    ["solve", "--model", "cstr", "--size", "3", "--start", "0,1"],
    ["solve", "--model", "cstr", "--start", "1,x"],
    ["solve", "--model", "nope"],
    ["solve", "--model", "cstr", "--bogus"],
    ["solve", "--model", "smallbatch", "--size", "2"],
    ["verify", "--model", "cstr"],
    [],
])
def test_bad_arguments_exit_two(args, capsys):
    code, _, err = run(args, capsys)
    assert code == 2
    record = json.loads(err.strip().splitlines()[-1])
    assert record["exit_code"] == 2 and record["status"] == "bad_arguments"


def test_infeasible_start_exit_one(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, err = run(["solve", "--model", "cstr", "--size", "3", "--start", "1,2",
                        "--out", str(out)], capsys)
    assert code == 1
    assert json.loads(err)["type"] == "InfeasibleStart"
    assert load_report(out).status == "infeasible_start"


def test_budget_exit_three(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run(["solve", "--model", "cstr", "--size", "3", "--max-solves", "2",
                      "--out", str(out)], capsys)
    assert code == 3 and load_report(out).certificate == "budget-exhausted"
    code, text, _ = run(["enumerate", "--model", "cstr", "--size", "3", "--max-solves", "2"], capsys)
    assert code == 3 and len(text.splitlines()) == 1 + 4


def test_verify(capsys):
    code, text, _ = run(["verify", "--model", "cstr", "--size", "3", "--point", "3,3"], capsys)
    rep = json.loads(text)
    assert code == 0 and rep["extra"]["local"] and rep["certificate"] == "i-local"
    code, text, _ = run(["verify", "--model", "cstr", "--size", "3", "--point", "1,1",
                         "--neighborhood", "2"], capsys)
    rep = json.loads(text)
    assert not rep["extra"]["local"] and rep["certificate"] is None


def test_ablation_flags_keep_result(capsys):
    base = json.loads(run(["solve", "--model", "cstr", "--size", "3"], capsys)[1])
    flags = ["--no-fbbt", "--no-visited", "--no-domain-check", "--no-warm-start"]
    ablated = json.loads(run(["solve", "--model", "cstr", "--size", "3", *flags], capsys)[1])
    assert (ablated["z"], ablated["certificate"]) == (base["z"], base["certificate"])
    assert ablated["objective"] == pytest.approx(base["objective"], rel=1e-6)


def test_report_round_trip(tmp_path, capsys):
    out = tmp_path / "r.json"
    run(["solve", "--model", "smallbatch", "--neighborhood", "2", "--out", str(out)], capsys)
    rep = load_report(out)
    assert rep.dumps() == out.read_text(encoding="utf-8")
    assert RunReport.from_dict(rep.to_dict()) == rep
    bad = rep.to_dict() | {"schema_version": 99}
    with pytest.raises(ValueError):
        RunReport.from_dict(bad)


def test_console_script_is_deterministic(tmp_path):
    outs = []
    for tag in ("a", "b"):
        rep, table = tmp_path / f"{tag}.json", tmp_path / f"{tag}.csv"
        base = [sys.executable, "-m", "ldsda.cli"]
        model = ["--model", "cstr", "--size", "3", "--threads", "4"]
        subprocess.run(base + ["solve", *model, "--out", str(rep)], check=True)
        subprocess.run(base + ["enumerate", *model, "--out", str(table)], check=True)
        outs.append((rep.read_bytes(), table.read_bytes()))
    assert outs[0] == outs[1]
