import json
import subprocess
import sys

import pytest

from socialpricing import __version__
from socialpricing.cli import FIG7_COLUMNS, fmt, run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_reference_point(capsys):
    code, out, _ = run(capsys, "solve", "--vh", "3.8", "--vl", "1.9", "--l", "0.5")
    rec = json.loads(out)
    assert code == 0
    assert rec["region"] == "IV"
    assert rec["rho_star"] == pytest.approx(0.29289, abs=1e-5)


def test_region_reports_boundaries(capsys):
    code, out, _ = run(capsys, "region", "--vh", "4", "--vl", "3")
    rec = json.loads(out)
    assert code == 0 and rec["region"] == "I"
    assert len(rec) > 1


def test_welfare_csv(capsys):
    code, out, _ = run(capsys, "welfare", "--vh", "2.6", "--vl", "1.4", "--format", "csv")
    header, row = out.strip().splitlines()
    assert code == 0
    assert "region" in header.split(",")
    assert len(header.split(",")) == len(row.split(","))


def test_continuous_exact_and_mc(capsys):
    code, out, _ = run(capsys, "continuous", "--vbar", "5")
    rec = json.loads(out)
    assert code == 0 and rec["case_id"] == 2
    assert "seed" not in rec
    code, out, _ = run(capsys, "continuous", "--vbar", "5", "--samples", "1000", "--seed", "2")
    rec = json.loads(out)
    assert rec["seed"] == 2 and rec["version"] == __version__


def test_simulate_small(capsys):
    code, out, _ = run(capsys, "simulate", "--vh", "3.8", "--vl", "1.9", "--shuffles", "200", "--seed", "12")
    rec = json.loads(out)
    assert code == 0
    assert rec["ulp_mean"] >= rec["slp_mean"] >= rec["nlp_mean"]


def test_verify_single_suite(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "equilibrium", "--seed", "1")
    rec = json.loads(out)
    assert code == 0 and rec["all_passed"]
    assert all(c["epsilon"] <= c["tolerance"] for c in rec["checks"].values())


def test_fig7_schema_and_determinism(tmp_path, capsys):
    args = ["fig7", "--vh-max", "4", "--steps", "4", "--shuffles", "300", "--seed", "12"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run_cli(args + ["-o", str(a), "--threads", "1"]) == 0
    assert run_cli(args + ["-o", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == f"# socialpricing {__version__} seed=12"
    assert lines[1] == ",".join(FIG7_COLUMNS) == "v_H,nlp_mean,ulp_mean,slp_mean,slp_stderr"
    assert len(lines) == 2 + 4
    for line in lines[2:]:
        for cell in line.split(","):
            assert cell == fmt(float(cell))


def test_fmt_nine_significant_digits():
    assert fmt(1 / 3) == "0.333333333"
    assert fmt(2.0) == "2"
    assert fmt(123456.789012) == "123456.789"


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("vh: 4\nvl: 3\nl: 0.5\n")
    _, out, _ = run(capsys, "solve", "--config", str(cfg))
    assert json.loads(out)["region"] == "I"
    _, out, _ = run(capsys, "solve", "--config", str(cfg), "--vl", "1.9", "--vh", "3.8")
    assert json.loads(out)["region"] == "IV"
    js = tmp_path / "c.json"
    js.write_text(json.dumps({"vh": 3.8, "vl": 1.9}))
    _, out, _ = run(capsys, "solve", "--config", str(js))
    assert json.loads(out)["region"] == "IV"


def test_config_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("bogus: 1\n")
    code, _, err = run(capsys, "solve", "--config", str(cfg))
    assert code != 0 and "bogus" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--vh", "3", "--vl", "1", "--nope"],
        ["simulate", "--vh", "3.8", "--vl", "1.9"],
        ["fig7", "--steps", "2"],
        ["verify"],
        ["continuous", "--vbar", "5", "--samples", "10"],
        ["solve", "--vl", "1"],
        ["simulate", "--vh", "3.8", "--vl", "1.9", "--seed", "1", "--graph", "/nonexistent.edges"],
        ["solve", "--vh", "1", "--vl", "2"],
        ["solve", "--config", "/nonexistent.yaml"],
        ["continuous", "--vbar", "5", "--samples", "0", "--seed", "1"],
    ],
)
def test_errors_exit_nonzero(argv, capsys):
    code, _, err = run(capsys, *argv)
    assert code != 0
    assert err


def test_bad_graph_file_reports_line(tmp_path, capsys):
    g = tmp_path / "g.edges"
    g.write_text("0 1\n2 2\n")
    code, _, err = run(capsys, "simulate", "--vh", "3.8", "--vl", "1.9", "--seed", "1", "--graph", str(g))
    assert code == 1 and "line 2" in err


def test_console_entry_point_module():
    res = subprocess.run([sys.executable, "-m", "socialpricing", "region", "--vh", "3.8", "--vl", "1.9"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["region"] == "IV"
