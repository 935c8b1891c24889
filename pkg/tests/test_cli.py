import json
import subprocess
import sys

import pytest

from amoeba_scope.cli import main


def test_scenario_command(tmp_path, capsys):
    assert main(["scenario", "pinch_locate", "--out", str(tmp_path)]) == 0
    assert "pinch_locate: wrote" in capsys.readouterr().err
    assert (tmp_path / "metrics.json").exists()


def test_bare_scenario_name(tmp_path):
    assert main(["pinch_locate", "--out", str(tmp_path), "--seed", "4"]) == 0
    assert json.loads((tmp_path / "metrics.json").read_text())["seed"] == 4


def test_classify_tool(tmp_path, capsys):
    code = main(["classify", "--poly", "1 + z + w", "--point", "0,0", "--point", "5,0", "--out", str(tmp_path)])
    assert code == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].startswith("x_1,x_2,verdict")
    assert ",Interior," in out[1] and ",Outside," in out[2]


def test_points_file(tmp_path, capsys):
    pts = tmp_path / "p.csv"
    pts.write_text("x1,x2\n0,0\n")
    assert main(["classify", "--points", str(pts), "--out", str(tmp_path / "o")]) == 0


def test_raster_and_contour_tools(tmp_path):
    assert main(["raster", "--res", "21", "--angles", "90", "--out", str(tmp_path / "r")]) == 0
    assert (tmp_path / "r" / "amoeba.rle").exists()
    assert main(["contour", "--res", "30", "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "contour.csv").exists()


def test_pinch_tool_prints_json(tmp_path, capsys):
    assert main(["pinch", "--out", str(tmp_path)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert abs(out["r_star"] - 6 ** -0.5) < 1e-6


@pytest.mark.parametrize("argv", [
    ["scenario", "nope"],
    ["raster", "--window", "1,0,0,1"],
    ["classify", "--poly", "1 + ", "--point", "0,0"],
    ["classify"],
    ["raster", "--window", "a,b"],
])
def test_invalid_input_exit_2(tmp_path, capsys, argv):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert capsys.readouterr().err.startswith("error:")


def test_config_error_exit_2(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"res": "x"}))
    assert main(["fig3_hyperbola", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "res" in capsys.readouterr().err


def test_numeric_failure_exit_3(tmp_path, capsys):
    assert main(["pinch", "--curve", "2; t; t^2", "--out", str(tmp_path)]) == 3
    assert "EntireFamily" in capsys.readouterr().err


def test_console_script_module(tmp_path):
    r = subprocess.run([sys.executable, "-m", "amoeba_scope.cli", "scenario", "nope", "--out", str(tmp_path)],
                       capture_output=True, text=True)
    assert r.returncode == 2


def test_negative_list_values(tmp_path, capsys):
    assert main(["raster", "--window", "-4,4,-4,4", "--res", "11", "--angles", "60", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "metrics.json").read_text())["config"]["window"] == [-4, 4, -4, 4]
    assert main(["classify", "--point", "-1,-1", "--out", str(tmp_path)]) == 0
    assert ",Outside," in capsys.readouterr().out
