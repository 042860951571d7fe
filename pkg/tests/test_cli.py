import csv
import io
import re
import subprocess
import sys
from pathlib import Path

import pytest

from crosstrain.cli import main
from crosstrain.report import csv_text, emit_csv, emit_svg
from crosstrain.sweep import SweepTable

GOLDEN = Path(__file__).parent / "golden"
QUAD = ["--method", "quad", "--nodes", "64"]


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def fields(text):
    return {r["field"]: r["value"] for r in csv.DictReader(io.StringIO(text))}


def test_regime():
    code, out = run("regime")
    assert code == 0
    f = fields(out)
    assert f["label"] == "1a" and f["allocation_case"] == "Case1"


def test_solve_quadrature():
    code, out = run("solve", *QUAD, "--set", "h=5000", "--set", "c2=9000", "--no-cross-check")
    assert code == 0
    f = fields(out)
    assert f["method_alpha"] == "AnalyticFOC" and float(f["x1_alpha"]) > 0
    assert float(f["total"]) == pytest.approx(
        float(f["first_stage"]) + float(f["second_stage"]) + float(f["opportunity"]))


def test_saa_requires_seed(capsys):
    code, _ = run("solve")
    assert code == 2
    assert "--seed" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["regime", "--set", "bogus=1"],
    ["regime", "--set", "h"],
    ["regime", "--config", "/nonexistent.cfg"],
    ["sweep", *QUAD, "--experiment", "nope"],
    ["sweep", *QUAD],
])
def test_config_errors_exit_2(argv):
    assert run(*argv)[0] == 2


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--method", "magic"])
    assert exc.value.code == 2


def test_evaluate_scenario():
    code, out = run("evaluate", "--x1", "1000", "0", "--scenario", "60000", "3000", "0.9", "0.9", "0.9", "0.9",
                    "--set", "x0=5400")
    f = fields(out)
    assert code == 0 and f["region"] == "2b"
    assert float(f["closed_form_cost"]) == pytest.approx(float(f["oracle_cost"]))


def test_evaluate_expectation_and_infeasible(capsys):
    code, out = run("evaluate", "--x1", "0", "0", *QUAD)
    assert code == 0 and float(fields(out)["total"]) > 0
    assert run("evaluate", "--x1", "99999", "0", *QUAD)[0] == 2


def test_oracle_writes_surface(tmp_path):
    code, out = run("oracle", *QUAD, "--step", "13500", "--set", "h=5000", "--set", "c2=9000",
                    "--out-dir", str(tmp_path))
    assert code == 0
    rows = list(csv.reader(open(tmp_path / "surface.csv", newline="")))
    assert rows[0] == ["x1_alpha", "x1_gamma", "total"] and len(rows) == 1 + 5 * 5


def _custom_sweep(tmp_path, *extra):
    return run("sweep", *QUAD, "--kind", "DemandVarAlpha", "--axis", "0,4000,8000",
               "--normalization", "vs_deterministic_demand", "--name", "small",
               "--set", "h=8000", "--out-dir", str(tmp_path), *extra)


def test_sweep_outputs_and_svg_series(tmp_path):
    code, out = _custom_sweep(tmp_path)
    assert code == 0 and "3 rows, 0 failed" in out
    svg = (tmp_path / "small.svg").read_text()
    assert svg.startswith("<?xml")
    for col in ("total_ratio", "first_stage_ratio", "second_stage_ratio", "opportunity_ratio"):
        group = re.search(rf'<g id="series-{col}">(.*?)</g>\s*</g>', svg, re.S)
        assert group, col
        assert len(re.findall(r"<use ", group.group(1))) == 3


def test_sweep_golden_and_byte_stable(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    _custom_sweep(a)
    _custom_sweep(b)
    for name in ("small.csv", "small.svg"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert (a / "small.csv").read_bytes() == (GOLDEN / "small.csv").read_bytes()


def test_sweep_failure_exit_3(tmp_path):
    code, out = run("sweep", *QUAD, "--kind", "Delta2Ratio", "--axis", "0.8,0.9",
                    "--set", "delta1_alpha=0", "--no-plot", "--out-dir", str(tmp_path))
    assert code == 2  # delta1 = 0 is rejected up front
    cfg = tmp_path / "u.cfg"
    cfg.write_text("[alpha]\nx0=54000\nc1=2800\nc2=4000\nh=3500\n"
                   "[gamma]\nx0=54000\nc1=2800\nc2=4000\nh=3500\n"
                   "[random]\nd_alpha=uniform 55000 65000\nd_gamma=uniform 20000 60000\n"
                   "delta1_alpha=uniform 0.8 0.9\ndelta1_gamma=0.9\n")
    code, out = run("sweep", *QUAD, "--config", str(cfg), "--kind", "Delta2Ratio", "--axis", "0.8,0.9",
                    "--no-plot", "--out-dir", str(tmp_path), "--name", "bad")
    assert code == 3 and "2 failed" in out
    rows = list(csv.reader(open(tmp_path / "bad.csv", newline="")))
    assert rows[1][-1].startswith("error: ConfigError")


def test_empty_table_csv_is_header_only(tmp_path):
    t = SweepTable(("a", "b"), [])
    p = emit_csv(t, tmp_path / "e.csv")
    assert p.read_bytes() == b"a,b\r\n"
    emit_svg(t, tmp_path / "e.svg")
    assert (tmp_path / "e.svg").exists()


def test_csv_floats_round_trip():
    text = csv_text(("x",), [(0.1 + 0.2,), (1e-300,)])
    vals = [float(r[0]) for r in list(csv.reader(io.StringIO(text)))[1:]]
    assert vals == [0.1 + 0.2, 1e-300]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "crosstrain", "regime"], capture_output=True, text=True)
    assert proc.returncode == 0 and "label,1a" in proc.stdout
