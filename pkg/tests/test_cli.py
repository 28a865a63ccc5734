import json
import os
from pathlib import Path

import pytest

from bosonic_mip.cli import main
from bosonic_mip.experiment import apply_override, oracle, resolve_config, run, sweep
from bosonic_mip.errors import ConfigError
from bosonic_mip.presets import preset, preset_names


def tiny_config(**overrides):
    cfg = preset("fig1")
    cfg["dims"] = 6
    cfg["schedule"].update({"steps": 151, "total_time": 10.0, "snapshot_stride": 25})
    for key, value in overrides.items():
        cfg[key] = value
    return cfg


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


def test_resolve_config_validation():
    cfg = tiny_config()
    resolved = resolve_config(cfg)
    assert resolved["schedule"]["steps"] == 151
    bad = tiny_config()
    bad["schedule"]["variant"] = "warp"
    with pytest.raises(ConfigError):
        resolve_config(bad)
    with pytest.raises(ConfigError):
        resolve_config({"schema_version": 1})
    with pytest.raises(ConfigError):
        resolve_config(tiny_config(sweep={"axis": "nope", "grid": [1.0]}))


def test_apply_override_paths():
    cfg = tiny_config()
    apply_override(cfg, "schedule.steps", "301")
    assert cfg["schedule"]["steps"] == 301
    apply_override(cfg, "initial_state.p0", "0.5")
    assert cfg["initial_state"]["p0"] == 0.5
    apply_override(cfg, "notes", "hello world")
    assert cfg["notes"] == "hello world"


def test_run_artifacts_and_determinism(tmp_path):
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    m1 = run(tiny_config(), out1, seed=3)
    m2 = run(tiny_config(), out2, seed=3)
    for name in ("trajectory.csv", "final_distribution.csv"):
        assert read(out1 / name) == read(out2 / name)
    assert (out1 / "manifest.json").exists()
    assert m1["metrics"]["success"] == m2["metrics"]["success"]
    header = (out1 / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,")
    assert header.endswith(",norm")
    assert "⟩" in header  # outcome labels like |0,5>
    # seed only drives sampling; the deterministic trajectory is unchanged
    m3 = run(tiny_config(), tmp_path / "c", seed=4)
    assert m3["seed"] != m1["seed"]
    assert read(out1 / "trajectory.csv") == read(tmp_path / "c" / "trajectory.csv")


def test_manifest_rerun_reproduces(tmp_path):
    out1 = tmp_path / "a"
    run(tiny_config(), out1, seed=9)
    manifest = json.loads((out1 / "manifest.json").read_text())
    out2 = tmp_path / "b"
    run(manifest["config"], out2)
    assert read(out1 / "trajectory.csv") == read(out2 / "trajectory.csv")
    assert read(out1 / "final_distribution.csv") == read(out2 / "final_distribution.csv")


def test_sweep_rows_match_standalone(tmp_path):
    cfg = tiny_config(sweep={"axis": "p0", "grid": [0.3, 0.72]})
    manifest = sweep(cfg, tmp_path / "s", seed=3, threads=1)
    rows = manifest["rows"]
    assert [row["p0"] for row in rows] == [0.3, 0.72]
    standalone = tiny_config()
    standalone["initial_state"]["p0"] = 0.3
    m = run(standalone, tmp_path / "p", seed=3)
    assert m["metrics"]["success"] == pytest.approx(rows[0]["success"], abs=1e-12)
    text = (tmp_path / "s" / "summary.csv").read_text().splitlines()
    assert text[0].startswith("p0,")


def test_sweep_total_time_scales_steps(tmp_path):
    cfg = tiny_config(
        sweep={"axis": "total_time", "grid": [5.0, 10.0], "steps_policy": "scale-with-T"}
    )
    manifest = sweep(cfg, tmp_path / "t", seed=1, threads=1)
    assert len(manifest["rows"]) == 2


def test_oracle_report(tmp_path):
    report = oracle(tiny_config(), tmp_path / "o")
    assert report["agreement"] is True
    optima = {tuple(sorted(o.items())) for o in report["brute_force"]["optima"]}
    assert len(optima) == 6
    assert (tmp_path / "o" / "oracle.json").exists()


def test_cli_validate_and_exit_codes(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(tiny_config()))
    assert main(["validate", "--config", str(cfg_path)]) == 0
    bad = tiny_config()
    bad["schedule"]["variant"] = "warp"
    bad_path = tmp_path / "bad.json"
    bad_path.write_text(json.dumps(bad))
    assert main(["validate", "--config", str(bad_path)]) == 2
    assert main(["validate", "--config", str(tmp_path / "missing.json")]) == 2


def test_cli_run_and_numeric_failure(tmp_path, capsys):
    out = tmp_path / "run"
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(tiny_config()))
    code = main([
        "run", "--config", str(cfg_path), "--out", str(out), "--seed", "5",
        "--override", "schedule.steps=101",
    ])
    assert code == 0
    assert (out / "manifest.json").exists()

    # r too large for the truncation -> numeric failure, exit 3 + error.json
    out2 = tmp_path / "fail"
    code = main([
        "run", "--config", str(cfg_path), "--out", str(out2),
        "--override", "initial_state.r=1.9", "--override", "dims=3",
    ])
    assert code == 3
    error = json.loads((out2 / "error.json").read_text())
    assert error["error"]["type"] == "TruncationError"


def test_cli_presets_list(capsys):
    assert main(["presets", "list"]) == 0
    out = capsys.readouterr().out
    for name in ("fig1", "fig2", "fig3b", "fig4a", "fig4b", "fig5", "figS2"):
        assert name in out
    assert "aliases" in out


def test_presets_resolve():
    for name in preset_names():
        resolve_config(preset(name))
    assert preset("fig1b") == preset("fig1")
    with pytest.raises(ConfigError):
        preset("figZZ")


def test_threads_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("BOSONIC_MIP_THREADS", "1")
    cfg = tiny_config(sweep={"axis": "p0", "grid": [0.4, 0.6]})
    manifest = sweep(cfg, tmp_path / "s")
    assert len(manifest["rows"]) == 2
