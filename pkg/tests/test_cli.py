import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from swarmsteer import trajio
from swarmsteer.cli import main, preset_paths

SMALL = {"name": "small", "law": "tva", "duration": 2.0, "seed": 3,
         "init": {"kind": "random_box", "n": 4, "box_mm": 1500, "min_sep_mm": 400},
         "tva": {"mu": 1.0, "K": 2},
         "expect": [{"metric": "theta_total_max", "op": ">=", "value": 0.0}]}


def write(tmp_path, data, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data, indent=2))
    return p


def preset(name):
    return next(p for p in preset_paths() if p.name == name + ".json")


def test_presets_list(capsys):
    assert main(["presets", "list"]) == 0
    assert len(capsys.readouterr().out.split()) == 6


def test_simulate_ok(tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", str(write(tmp_path, SMALL)), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["metrics.csv", "trajectory.csv"]
    t = trajio.read_table(out / "trajectory.csv")
    assert t.n_agents == 4 and len(t.times()) == 51


def test_simulate_property_failure(tmp_path):
    d = dict(SMALL, expect=[{"metric": "theta_total_final", "op": "<", "value": -1.0}])
    assert main(["simulate", str(write(tmp_path, d)), "--out", str(tmp_path / "o")]) == 2


def test_unknown_metric_fails(tmp_path):
    d = dict(SMALL, expect=[{"metric": "no_such_metric", "op": "<", "value": 1.0}])
    assert main(["simulate", str(write(tmp_path, d)), "--out", str(tmp_path / "o")]) == 2


def test_simulate_missing_config(tmp_path, capsys):
    out = tmp_path / "o"
    assert main(["simulate", str(tmp_path / "nope.json"), "--out", str(out)]) == 1
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []


def test_simulate_bad_config_diagnostic(tmp_path, capsys):
    d = dict(SMALL, tva={"mu": 1.0, "K": 9})
    out = tmp_path / "o"
    assert main(["simulate", str(write(tmp_path, d)), "--out", str(out)]) == 1
    err = capsys.readouterr().err
    assert "tva.K" in err and "line" in err
    assert not out.exists()


def test_numerical_error_diagnostic(tmp_path, capsys):
    d = {"law": "mmc", "duration": 1.0, "avoidance": {"range_mm": 0},
         "agents": [{"r": [0, 0], "nu": 200}, {"r": [0, 0], "nu": 200, "heading": 1}]}
    assert main(["simulate", str(write(tmp_path, d)), "--out", str(tmp_path / "o")]) == 1
    assert "step 0" in capsys.readouterr().err


def test_seed_override(tmp_path):
    cfg = write(tmp_path, SMALL)
    main(["simulate", str(cfg), "--out", str(tmp_path / "a"), "--seed", "11"])
    main(["simulate", str(cfg), "--out", str(tmp_path / "b")])
    assert (tmp_path / "a/trajectory.csv").read_bytes() != (tmp_path / "b/trajectory.csv").read_bytes()


def test_env_default_out(tmp_path, monkeypatch):
    monkeypatch.setenv("SWARMSTEER_OUT", str(tmp_path / "envout"))
    assert main(["simulate", str(write(tmp_path, SMALL))]) == 0
    assert (tmp_path / "envout" / "trajectory.csv").exists()


@pytest.fixture(scope="module")
def dissipative_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("diss")
    code = main(["simulate", str(preset("mmc-dissipative")), "--out", str(out), "--plots"])
    return out, code


def test_mmc_six_panels(dissipative_run):
    out, code = dissipative_run
    assert code in (0, 2)
    svgs = sorted((out / "plots").glob("*.svg"))
    assert len(svgs) == 6
    for p in svgs:
        root = ET.parse(p).getroot()
        assert root.tag == "{http://www.w3.org/2000/svg}svg"
        assert (root.get("width"), root.get("height"), root.get("version")) == ("800", "600", "1.1")
        assert "href" not in p.read_text()


def test_plots_do_not_change_metrics(dissipative_run, tmp_path):
    out, _ = dissipative_run
    main(["simulate", str(preset("mmc-dissipative")), "--out", str(tmp_path)])
    assert (tmp_path / "metrics.csv").read_bytes() == (out / "metrics.csv").read_bytes()
    assert (tmp_path / "trajectory.csv").read_bytes() == (out / "trajectory.csv").read_bytes()


def test_svg_deterministic(dissipative_run, tmp_path):
    out, _ = dissipative_run
    main(["simulate", str(preset("mmc-dissipative")), "--out", str(tmp_path), "--plots"])
    for p in (out / "plots").glob("*.svg"):
        assert (tmp_path / "plots" / p.name).read_bytes() == p.read_bytes()


def test_compare_self_zero(dissipative_run, tmp_path):
    out, _ = dissipative_run
    run = out / "trajectory.csv"
    assert main(["compare", str(run), str(run), "--out", str(tmp_path)]) == 0
    e = trajio.read_table(tmp_path / "error.csv", trajio.ERROR_COLUMNS + ("E_pct_err",))
    assert np.all(e["e_mm"] == 0)


def test_compare_shift(dissipative_run, tmp_path):
    out, _ = dissipative_run
    ideal = out / "ideal.csv"
    t = trajio.read_table(ideal)
    t.columns["x_mm"] = t["x_mm"] + np.where(t["agent_id"] == 1, 30.0, 0.0)
    t.columns["y_mm"] = t["y_mm"] + np.where(t["agent_id"] == 1, 40.0, 0.0)
    shifted = tmp_path / "shifted.csv"
    trajio.write_table(t, shifted)
    assert main(["compare", str(shifted), str(ideal), "--out", str(tmp_path / "o")]) == 0
    e = trajio.read_table(tmp_path / "o/error.csv", trajio.ERROR_COLUMNS + ("E_pct_err",))
    grid = e.grid("e_mm")
    assert np.allclose(grid[:, 1], 50.0, atol=1e-9) and np.all(grid[:, 0] == 0)


def test_compare_matches_simulate_errors(dissipative_run, tmp_path):
    out, _ = dissipative_run
    main(["compare", str(out / "trajectory.csv"), str(out / "ideal.csv"), "--out", str(tmp_path)])
    assert (tmp_path / "error.csv").read_bytes() == (out / "error.csv").read_bytes()


def test_compare_pure_noisy_slope(tmp_path):
    run_dir = tmp_path / "run"
    main(["simulate", str(preset("mmc-pure-noisy")), "--out", str(run_dir)])
    assert main(["compare", str(run_dir / "trajectory.csv"), str(run_dir / "ideal.csv"),
                 "--out", str(tmp_path / "cmp")]) == 0
    rows = dict(line.split(",") for line in (tmp_path / "cmp/metrics.csv").read_text().split()[1:])
    assert float(rows["error_slope_mm_s"]) > 0


def test_compare_schema_error(tmp_path, capsys, dissipative_run):
    out, _ = dissipative_run
    bad = tmp_path / "bad.csv"
    bad.write_text((out / "trajectory.csv").read_text().replace("x_mm", "X", 1))
    assert main(["compare", str(bad), str(out / "ideal.csv"), "--out", str(tmp_path / "o")]) == 1
    assert "column 3" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_tva_plots(tmp_path):
    assert main(["simulate", str(write(tmp_path, SMALL)), "--out", str(tmp_path / "o"), "--plots"]) == 0
    assert sorted(p.name for p in (tmp_path / "o/plots").iterdir()) == [
        "contrast.svg", "curvature.svg", "trajectories.svg"]


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "swarmsteer.cli", "presets", "list"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "tva-flock8-K3" in r.stdout
    r = subprocess.run([sys.executable, "-m", "swarmsteer.cli", "simulate", str(tmp_path / "x.json")],
                       capture_output=True, text=True, cwd=tmp_path)
    assert r.returncode == 1
