import csv
import json

import numpy as np
import pytest

from bosonic_mip.errors import ConfigError
from bosonic_mip.experiment import oracle, resolve_config, run, sweep
from bosonic_mip.presets import preset


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_homodyne_plan_artifacts(tmp_path):
    cfg = preset("fig4a")
    cfg["schedule"].update({"steps": 101, "total_time": 5.0, "snapshot_stride": 50})
    cfg["measurement"]["shots"] = 40
    manifest = run(cfg, tmp_path, seed=2)
    samples = read_csv(tmp_path / "homodyne_samples.csv")
    assert len(samples) == 40
    assert set(samples[0]) == {"shot", "x1", "x2", "x3", "x4", "x5"}
    hist = read_csv(tmp_path / "threshold_histogram.csv")
    total = sum(int(row["count"]) for row in hist)
    assert total == 40
    for row in hist:
        assert len(row["pattern"]) == 5
    assert manifest["outputs"]["threshold_histogram"] == "threshold_histogram.csv"
    # threshold solutions derive from the clique supports only
    assert manifest["metrics"]["labels"] == ["P(x:10110)", "P(x:11010)"]


def test_conditional_plan_artifacts(tmp_path):
    cfg = preset("fig5")
    cfg["dims"] = 4
    cfg["schedule"].update({"steps": 151, "total_time": 10.0, "snapshot_stride": 50})
    cfg["measurement"]["shots"] = 60
    cfg["initial_state"]["max_leak"] = 0.2
    cfg["simplex_frames"] = {"times": [0.0, 10.0], "shots": 25, "modes": [1, 2, 3]}
    manifest = run(cfg, tmp_path, seed=4)
    cond = read_csv(tmp_path / "conditional_x2.csv")
    assert [row["mode"] for row in cond] == ["1", "2", "3"]
    for row in cond:
        assert float(row["exact_x2"]) > 0.0
        assert int(row["shots"]) == 60
    frames = read_csv(tmp_path / "simplex_samples.csv")
    assert len(frames) == 2 * 25
    assert {row["frame"] for row in frames} == {"0", "1"}
    traj_header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    # tracked marginal over the selector modes only (three indices per label)
    assert traj_header.count("|") == traj_header.count("⟩")
    assert manifest["metrics"]["labels"] == ["P(|1,0,1⟩)"]


def test_lambda_sweep_with_spad(tmp_path):
    cfg = preset("figS4a")
    cfg["schedule"].update({"steps": 101, "total_time": 5.0, "snapshot_stride": 50})
    cfg["sweep"]["grid"] = [1.0, 4.0]
    manifest = sweep(cfg, tmp_path, seed=1, threads=1)
    rows = manifest["rows"]
    assert [row["lambda"] for row in rows] == [1.0, 4.0]
    assert {"P_s1", "P_s2"} <= set(rows[0])
    for row in rows:
        assert 0.0 <= row["P_s1"] <= 1.0
        assert row["success"] == pytest.approx(row["P_s1"] + row["P_s2"], abs=1e-12)


def test_sigma_sweep(tmp_path):
    cfg = preset("figS4a")
    cfg["schedule"].update({"steps": 51, "total_time": 2.0, "snapshot_stride": 25})
    cfg["sweep"] = {"axis": "sigma", "grid": [3, 4]}
    manifest = sweep(cfg, tmp_path, seed=1, threads=1)
    assert len(manifest["rows"]) == 2


def test_sigma_sweep_rejects_wrong_problem(tmp_path):
    cfg = preset("fig1")
    cfg["sweep"] = {"axis": "sigma", "grid": [3, 4]}
    with pytest.raises(ConfigError):
        sweep(cfg, tmp_path)


def test_oracle_continuous_problem(tmp_path):
    cfg = preset("fig4a")
    report = oracle(cfg, tmp_path)
    assert report["agreement"] is None  # no diagonal check for x-encoded models
    assert report["brute_force"]["optimal_value"] == pytest.approx(-2 / 3, abs=1e-9)


def test_oracle_knapsack_slack_values(tmp_path):
    cfg = preset("fig2")
    cfg["slack_kind"] = "nonneg-integer"  # diagonal check needs integer slack
    cfg["dims"] = 8
    report = oracle(cfg, tmp_path)
    assert report["agreement"] is True
    assert report["compiled"]["diagonal_minimizers"] == [[0, 7, 1]]


def test_tracked_outcomes_explicit(tmp_path):
    cfg = preset("fig1")
    cfg["dims"] = 6
    cfg["schedule"].update({"steps": 101, "total_time": 5.0, "snapshot_stride": 20})
    cfg["tracked"] = {"modes": "all", "outcomes": [[0, 5], [5, 0]], "top": 8}
    run(cfg, tmp_path, seed=1)
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header == 't,"|0,5⟩","|5,0⟩",norm'


def test_final_distribution_sorted(tmp_path):
    cfg = preset("fig1")
    cfg["dims"] = 5
    cfg["schedule"].update({"steps": 101, "total_time": 5.0, "snapshot_stride": 50})
    run(cfg, tmp_path, seed=1)
    rows = read_csv(tmp_path / "final_distribution.csv")
    probs = [float(r["probability"]) for r in rows]
    assert probs == sorted(probs, reverse=True)
    assert sum(probs) == pytest.approx(1.0, abs=1e-9)
