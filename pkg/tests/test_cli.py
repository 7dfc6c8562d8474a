import csv
import io
import json
import os

import pytest

from artifact.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, check_run, initial_data, main
from artifact.config import RunConfig
from artifact.errors import ConfigurationError
from artifact.lab.report import CSV_HEADER


def _config(tmp_path, **blocks):
    doc = {"output_dir": str(tmp_path / "runs"), "mc": {"samples": 2000, "seed": 1}}
    doc.update(blocks)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(doc))
    return str(path)


def _run(argv):
    buf = io.StringIO()
    code = main(argv, out=buf)
    return code, buf.getvalue()


def _run_dir(tmp_path, text):
    rid = text.strip().splitlines()[-1].split()[1].rstrip(":")
    return rid, tmp_path / "runs" / rid


# -- configuration -------------------------------------------------------------

def test_defaults_and_run_id():
    cfg = RunConfig.from_dict({})
    assert cfg.tier == "smoke"
    assert cfg["grid"]["n_per_axis"] == 32 and cfg["mc"]["samples"] == 10_000
    std = RunConfig.from_dict({"resolution_tier": "standard"})
    assert std["grid"]["n_per_axis"] == 64 and std["mc"]["samples"] == 100_000
    assert cfg.run_id_for("verify") == RunConfig.from_dict({}).run_id_for("verify")
    assert cfg.run_id_for("verify") != cfg.run_id_for("evolve")
    assert cfg.run_id_for("verify") != std.run_id_for("verify")
    moved = RunConfig.from_dict({"output_dir": "elsewhere"})
    assert moved.run_id_for("verify") == cfg.run_id_for("verify")


@pytest.mark.parametrize("doc", [
    {"kernel": {"gamma": 2.0}},
    {"kernel": {"b_profile": "cubic"}},
    {"kernel": {"gamma": 0, "extra": 1}},
    {"colour": "red"},
    {"resolution_tier": "huge"},
    {"grid": {"n_per_axis": 2.5}},
    {"mc": {"samples": "many"}},
    {"evolve": {"mode": "backwards"}},
    {"evolve": {"initial": {"kind": "triangle"}}},
    {"evolve": {"monitor": [[1, 2]]}},
    {"verify": {"subset": "L2.9"}},
    {"probe": {"sweep": {"k": 8}}},
])
def test_invalid_configs(doc):
    with pytest.raises(ConfigurationError):
        RunConfig.from_dict(doc)


def test_evolve_defaults_are_materialized():
    cfg = RunConfig.from_dict({"kernel": {"gamma": -1.0}, "evolve": {"initial": {"kind": "exp"}}})
    e = cfg["evolve"]
    assert e["model"] == "stretched"
    assert e["radial"] == {"R": 8.0, "n": 33, "stretch": 0.0}
    assert e["project_initial"] is True and e["channels"] == [0]


def test_load_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigurationError):
        RunConfig.load(bad)
    with pytest.raises(ConfigurationError):
        RunConfig.load(tmp_path / "missing.json")


def test_initial_data_kinds():
    import numpy as np

    v = np.array([[0.0, 0, 0], [1.0, 0, 0]])
    assert initial_data({"kind": "zero"}) is None
    np.testing.assert_allclose(initial_data({"kind": "bracket", "power": 2})(v), [1.0, 0.5])
    mix = initial_data({"kind": "gaussian_mix", "temperatures": [1.0], "weights": [1.0]})
    np.testing.assert_allclose(mix(v), 0, atol=1e-15)
    with pytest.raises(ConfigurationError):
        initial_data({"kind": "gaussian_mix", "temperatures": [1.0, 2.0], "weights": [1.0]})


# -- commands --------------------------------------------------------------------

def test_verify_pass_writes_run(tmp_path):
    cfg = _config(tmp_path, verify={"identities": ["prepost"]})
    code, text = _run(["verify", "--subset", "L7.4,Beta", "--config", cfg])
    assert code == EXIT_PASS
    assert "PASS L7.4" in text and "PASS identity prepost" in text
    rid, root = _run_dir(tmp_path, text)
    report = json.loads((root / "report.json").read_text())
    assert report["run_id"] == rid
    lines = (root / "report.csv").read_text().splitlines()
    assert lines[0] == f"# run_id={rid}"
    assert tuple(lines[1].split(",")) == CSV_HEADER
    manifest = json.loads((root / "manifest.json").read_text())
    assert manifest["exit_status"] == 0
    assert set(manifest["files"]) == {"config.json", "report.csv", "report.json"}
    assert check_run(str(root))["ok"]


def test_verify_failure_exit_code(tmp_path):
    cfg = _config(tmp_path, verify={"identities": []})
    code, text = _run(["verify", "--subset", "L2.9", "--config", cfg])
    assert code == EXIT_FAIL
    assert "FAIL L2.9" in text


def test_probe_writes_rows(tmp_path):
    cfg = _config(tmp_path)
    code, text = _run(["probe", "L2.9", "--config", cfg])
    assert code == EXIT_FAIL
    _, root = _run_dir(tmp_path, text)
    rows = list(csv.reader(io.StringIO((root / "probe_L2.9.csv").read_text())))
    assert tuple(rows[1]) == CSV_HEADER
    assert {r[1] for r in rows[2:]} == {f"gamma=0,k={k}" for k in (8, 16, 32, 64)}


@pytest.mark.parametrize("argv", [
    ["verify", "--subset", "L0.0"],
    ["probe", "L0.0"],
    ["frobnicate"],
])
def test_config_errors_exit_2(tmp_path, argv):
    cfg = _config(tmp_path)
    if argv[0] != "frobnicate":
        argv = argv + ["--config", cfg]
    assert _run(argv)[0] == EXIT_CONFIG


def test_malformed_config_exit_2(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{"kernel": {"gamma": 0, "bogus": true}}')
    assert _run(["verify", "--config", str(path)])[0] == EXIT_CONFIG
    path.write_text("[1, 2")
    assert _run(["evolve", "--config", str(path)])[0] == EXIT_CONFIG
    assert _run(["report", "--run-id", "nothing", "--output-dir", str(tmp_path)])[0] == EXIT_CONFIG


def test_evolve_zero_data(tmp_path):
    cfg = _config(tmp_path, evolve={"t_end": 1.0, "radial": {"n": 17}, "monitor": [[0], [4]]})
    code, text = _run(["evolve", "--config", cfg])
    assert code == EXIT_PASS
    _, root = _run_dir(tmp_path, text)
    lines = (root / "series.csv").read_text().splitlines()
    assert lines[1] == "t,L2_k0,L2_k4,mass_drift,momentum_drift,energy_drift,entropy"
    for ln in lines[2:]:
        vals = [float(x) for x in ln.split(",")[1:3]]
        assert vals == [0.0, 0.0]
    fit = json.loads((root / "fit.json").read_text())
    assert "skipped" in fit["fits"]["L2_k0"]


def test_evolve_picard(tmp_path):
    cfg = _config(tmp_path, evolve={
        "mode": "picard", "dt": 0.02, "t_end": 1.0, "radial": {"n": 17},
        "initial": {"kind": "gaussian_mix", "amplitude": 0.05}})
    code, text = _run(["evolve", "--config", cfg])
    assert code == EXIT_PASS and "PASS picard" in text
    _, root = _run_dir(tmp_path, text)
    rep = json.loads((root / "picard.json").read_text())["contraction"]
    assert rep["contracted"] and max(rep["ratios"]) <= 0.5


def test_report_and_tamper_detection(tmp_path):
    cfg = _config(tmp_path, verify={"identities": []})
    code, text = _run(["verify", "--subset", "L7.1", "--config", cfg])
    assert code == EXIT_PASS
    rid, root = _run_dir(tmp_path, text)
    out_dir = str(tmp_path / "runs")
    code, text = _run(["report", "--run-id", rid, "--output-dir", out_dir])
    assert code == EXIT_PASS and "PASS L7.1" in text
    assert _run(["check", "--run-id", rid, "--output-dir", out_dir])[0] == EXIT_PASS
    csv_path = root / "report.csv"
    csv_path.write_text(csv_path.read_text().replace("L7.1", "L7.2", 1))
    code, text = _run(["check", "--run-id", rid, "--output-dir", out_dir])
    assert code == EXIT_FAIL and "report.csv" in text
    os.remove(root / "report.json")
    res = check_run(str(root))
    assert res["missing"] == ["report.json"]


def test_rerun_is_byte_identical(tmp_path):
    cfg = _config(tmp_path, verify={"identities": ["carleman"]})
    code, text = _run(["verify", "--subset", "L2.6", "--config", cfg])
    _, root = _run_dir(tmp_path, text)
    first = {n: (root / n).read_bytes() for n in ("report.json", "report.csv")}
    code2, _ = _run(["verify", "--subset", "L2.6", "--config", cfg])
    assert code2 == code
    for n, data in first.items():
        assert (root / n).read_bytes() == data
