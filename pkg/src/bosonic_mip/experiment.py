"""Experiment harness: resolve configs, run evolutions, emit artifacts.

Artifacts per run: ``trajectory.csv`` (tracked-outcome probability
series), ``final_distribution.csv``, measurement CSVs according to the
plan, and ``manifest.json`` with the fully resolved config.  All CSV
content is a pure function of (config, seed): floats are written with 17
significant digits and no locale dependence.
"""

from __future__ import annotations

import copy
import csv
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .benchmarks import brute_force, instance
from .compiler import (
    BINARY,
    CONTINUOUS,
    INTEGER,
    compile_model,
    load_model,
    model_from_dict,
)
from .errors import ConfigError
from .evolution import ground_state
from .fock import assemble
from .measurement import (
    conditional_x2,
    exact_threshold_distribution,
    fairness_metrics,
    fock_probabilities,
    homodyne_sample,
    marginal,
    spad_success,
    threshold_bits,
)
from .presets import CONFIG_SCHEMA_VERSION, preset
from .solver import AdiabaticProgramSolver

THREADS_ENV = "BOSONIC_MIP_THREADS"


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return format(float(value), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) if not isinstance(v, str) else v for v in row])


def _outcome_label(outcome) -> str:
    return "|" + ",".join(str(int(n)) for n in outcome) + "⟩"


# ---------------------------------------------------------------------------
# config resolution


def resolve_config(config) -> dict:
    """Fill defaults, validate, and normalize a config dict (or preset name)."""
    if isinstance(config, str):
        config = preset(config)
    if not isinstance(config, dict):
        raise ConfigError("config must be a dict or a preset name")
    for required in ("problem", "dims", "initial_state"):
        if required not in config:
            raise ConfigError(f"config needs a {required!r} entry")
    cfg = copy.deepcopy(preset("fig1"))  # base defaults
    cfg.pop("notes", None)
    cfg.pop("simplex_frames", None)
    _deep_update(cfg, copy.deepcopy(config))
    if cfg.get("schema_version") != CONFIG_SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported config schema_version {cfg.get('schema_version')!r}"
        )
    if not isinstance(cfg["problem"], dict):
        raise ConfigError("config needs a 'problem' object")
    prob = cfg["problem"]
    if sum(k in prob for k in ("id", "path", "model")) != 1:
        raise ConfigError("problem must have exactly one of 'id', 'path', 'model'")
    sched = cfg["schedule"]
    if sched["variant"] not in ("continuous", "trotter"):
        raise ConfigError(f"unknown schedule variant {sched['variant']!r}")
    if float(sched["total_time"]) <= 0:
        raise ConfigError("total_time must be > 0")
    sweep = cfg.get("sweep")
    if sweep is not None:
        axis = sweep.get("axis")
        if axis not in ("p0", "total_time", "lambda", "sigma"):
            raise ConfigError(f"unknown sweep axis {axis!r}")
        grid = sweep.get("grid")
        if not grid or list(grid) != sorted(float(g) for g in grid):
            raise ConfigError("sweep grid must be a nonempty sorted list")
    plan = cfg["measurement"].get("plan", "fock")
    if plan not in ("fock", "homodyne", "conditional-x2"):
        raise ConfigError(f"unknown measurement plan {plan!r}")
    cfg["seed"] = int(cfg.get("seed", 0))
    return cfg


def _deep_update(base: dict, override: dict):
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value


def apply_override(cfg: dict, dotted_key: str, raw_value: str):
    """Set a dotted-path config entry, JSON-decoding the value if possible."""
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value
    node = cfg
    parts = dotted_key.split(".")
    for part in parts[:-1]:
        if part not in node or not isinstance(node[part], dict):
            node[part] = {}
        node = node[part]
    node[parts[-1]] = value
    return cfg


def _load_problem(cfg):
    prob = cfg["problem"]
    if "id" in prob:
        return instance(prob["id"], **prob.get("options", {}))
    if "path" in prob:
        return load_model(prob["path"])
    return model_from_dict(prob["model"])


def _modes_0based(modes, n_modes, what):
    out = []
    for m in modes:
        m = int(m)
        if not 1 <= m <= n_modes:
            raise ConfigError(f"{what}: 1-based mode index {m} out of range")
        out.append(m - 1)
    return tuple(out)


def _build_solver(cfg, model) -> AdiabaticProgramSolver:
    sched = cfg["schedule"]
    init = cfg["initial_state"]
    return AdiabaticProgramSolver(
        d=cfg["dims"],
        hbar=cfg["hbar"],
        p0=init["p0"],
        r=init["r"],
        max_leak=init.get("max_leak", 0.05),
        total_time=float(sched["total_time"]),
        variant=sched["variant"],
        steps=int(sched["steps"]),
        trotter_steps=int(sched["trotter_steps"]),
        snapshot_stride=int(sched["snapshot_stride"]),
        penalties=cfg.get("penalties"),
        scale_factor=float(cfg.get("scale_factor", 1.0)),
        method=cfg.get("method", "auto"),
        slack_kind=cfg.get("slack_kind", "nonneg-integer"),
        seed=cfg["seed"],
    )


def _solutions_spec(cfg, model, solver) -> dict:
    """Normalize the solutions section to measurable solution sets."""
    spec = cfg.get("solutions", "auto")
    n_modes = solver.compiled_.n_modes
    if isinstance(spec, dict) and "spad" in spec:
        sets = []
        for entry in spec["spad"]:
            sets.append(
                {
                    "kind": "spad",
                    "bright": _modes_0based(entry["bright"], n_modes, "spad"),
                    "zero": _modes_0based(entry["zero"], n_modes, "spad"),
                }
            )
        return {"mode": "spad", "sets": sets}

    kinds = {k for _, k in model.variables}
    if kinds == {CONTINUOUS}:
        # continuous-only models are read out through threshold bits; when
        # the optimal set is a face, keep its characteristic-vector corners
        oracle = brute_force(model, grid_step=1.0 / 30.0)
        corners = [
            a
            for a in oracle.optima
            if len({round(v, 9) for v in a.values() if v > 1e-9}) <= 1
        ] or list(oracle.optima)
        n_vertices = len(model.names)
        threshold = np.sqrt(solver.space_.hbar) / np.sqrt(2.0 * n_vertices)
        patterns = sorted(
            {
                tuple(int(a[name] >= threshold) for name in model.names)
                for a in corners
            }
        )
        return {"mode": "threshold", "patterns": patterns, "vertices": n_vertices}

    if spec == "auto":
        int_names = [n for n, k in model.variables if k in (INTEGER, BINARY)]
        box = max(
            solver.space_.dims[solver.compiled_.mode_map[n]] for n in int_names
        )
        oracle = brute_force(model, box=box)
        outcomes = sorted({tuple(int(a[n]) for n in int_names) for a in oracle.optima})
    else:
        outcomes = sorted(tuple(int(v) for v in o) for o in spec)
    return {"mode": "marginal", "outcomes": outcomes}


def _solution_metrics(cfg, model, solver, spec) -> dict:
    """Success / per-solution probabilities / spread for a fitted solver."""
    if spec["mode"] == "spad":
        dist = fock_probabilities(solver.final_state_)
        probs = [spad_success(dist, s["bright"], s["zero"]) for s in spec["sets"]]
        labels = [f"P_s{i + 1}" for i in range(len(probs))]
        total = dist.total()
    elif spec["mode"] == "threshold":
        n_vertices = spec["vertices"]
        threshold = np.sqrt(solver.space_.hbar) / np.sqrt(2.0 * n_vertices)
        exact = exact_threshold_distribution(solver.final_state_, threshold)
        probs = [exact[p] for p in spec["patterns"]]
        labels = ["P(x:" + "".join(map(str, p)) + ")" for p in spec["patterns"]]
        total = fock_probabilities(solver.final_state_).total()
    else:
        dist = solver.integer_marginal_ or fock_probabilities(solver.final_state_)
        probs = [dist.prob(o) for o in spec["outcomes"]]
        labels = ["P(" + _outcome_label(o) + ")" for o in spec["outcomes"]]
        total = fock_probabilities(solver.final_state_).total()
    probs_arr = np.asarray(probs, dtype=float)
    bias = None
    if len(probs) == 2:
        denom = probs_arr.sum()
        bias = float((probs_arr[0] - probs_arr[1]) / denom) if denom > 0 else None
    return {
        "labels": labels,
        "probs": [float(p) for p in probs],
        "success": float(probs_arr.sum()),
        "std_dev": float(probs_arr.std()),
        "bias": bias,
        "total": float(total),
    }


# ---------------------------------------------------------------------------
# run


def run(config, outdir, seed=None, threads=None) -> dict:
    """Execute one experiment and write its artifacts into ``outdir``."""
    cfg = resolve_config(config)
    if seed is not None:
        cfg["seed"] = int(seed)
    os.makedirs(outdir, exist_ok=True)
    started = time.time()

    model = _load_problem(cfg)
    solver = _build_solver(cfg, model)
    n_known = None  # number of modes known only after compile

    tracked_cfg = cfg.get("tracked") or {}
    track_modes_1b = tracked_cfg.get("modes", "all")
    frames_cfg = cfg.get("simplex_frames")
    state_times = tuple(float(t) for t in frames_cfg["times"]) if frames_cfg else ()

    # compile first so mode counts are known for index validation
    compiled = compile_model(model, cfg.get("penalties"),
                             slack_kind=cfg.get("slack_kind", "nonneg-integer"))
    n_known = compiled.n_modes
    if track_modes_1b != "all":
        solver.track_modes = _modes_0based(track_modes_1b, n_known, "tracked.modes")

    solver.fit(model, state_times=state_times)

    outputs = {}
    outputs["trajectory"] = _write_trajectory(cfg, solver, outdir, tracked_cfg)
    outputs["final_distribution"] = _write_final_distribution(solver, outdir)
    outputs.update(_run_measurement(cfg, solver, outdir))
    if frames_cfg:
        outputs["simplex_samples"] = _write_simplex_frames(cfg, solver, outdir, frames_cfg)

    spec = _solutions_spec(cfg, model, solver)
    metrics = _solution_metrics(cfg, model, solver, spec)

    manifest = {
        "config": cfg,
        "seed": cfg["seed"],
        "version": __version__,
        "wall_time_s": time.time() - started,
        "outputs": outputs,
        "metrics": metrics,
        "norm_drift": solver.trajectory_.norm_drift,
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return manifest


def _json_default(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"not JSON serializable: {type(value)}")


def _write_trajectory(cfg, solver, outdir, tracked_cfg) -> str:
    traj = solver.trajectory_
    outcomes_cfg = tracked_cfg.get("outcomes", "auto")
    top = int(tracked_cfg.get("top", 8))
    if outcomes_cfg == "auto":
        tracked = traj.tracked_dict(top=top)
    else:
        tracked = traj.tracked_dict(outcomes=[tuple(o) for o in outcomes_cfg])
    header = ["t"] + [_outcome_label(o) for o in tracked] + ["norm"]
    rows = []
    for i, t in enumerate(traj.times):
        rows.append(
            [t] + [series[i] for series in tracked.values()] + [traj.norms[i]]
        )
    path = os.path.join(outdir, "trajectory.csv")
    _write_csv(path, header, rows)
    return "trajectory.csv"


def _write_final_distribution(solver, outdir) -> str:
    dist = fock_probabilities(solver.final_state_)
    dims = dist.dims
    floor = 0.0 if int(np.prod(dims)) <= 4096 else 1e-12
    header = [f"n{i + 1}" for i in range(len(dims))] + ["probability"]
    rows = []
    flat = dist.probs.reshape(-1)
    order = np.argsort(flat, kind="stable")[::-1]
    for idx in order:
        p = float(flat[idx])
        if p < floor:
            break
        outcome = np.unravel_index(int(idx), dims)
        rows.append([int(v) for v in outcome] + [p])
    path = os.path.join(outdir, "final_distribution.csv")
    _write_csv(path, header, rows)
    return "final_distribution.csv"


def _run_measurement(cfg, solver, outdir) -> dict:
    plan = cfg["measurement"]
    outputs = {}
    n_modes = solver.compiled_.n_modes
    if plan["plan"] == "homodyne":
        modes = _modes_0based(
            plan.get("modes", range(1, n_modes + 1)), n_modes, "measurement.modes"
        )
        record = homodyne_sample(
            solver.final_state_, modes, int(plan.get("shots", 1000)), cfg["seed"]
        )
        path = os.path.join(outdir, "homodyne_samples.csv")
        header = ["shot"] + [f"x{m + 1}" for m in record.mode_order]
        _write_csv(
            path, header, ([i] + list(row) for i, row in enumerate(record.samples))
        )
        outputs["homodyne_samples"] = "homodyne_samples.csv"
        vertices = plan.get("threshold_vertices")
        if vertices:
            freqs, threshold = threshold_bits(record, int(vertices), solver.space_.hbar)
            path = os.path.join(outdir, "threshold_histogram.csv")
            rows = [
                ["".join(map(str, pattern)), int(round(f * record.shots)), f]
                for pattern, f in freqs.items()
            ]
            _write_csv(path, ["pattern", "count", "frequency"], rows)
            outputs["threshold_histogram"] = "threshold_histogram.csv"
    elif plan["plan"] == "conditional-x2":
        pattern_modes = _modes_0based(plan["pattern_modes"], n_modes, "pattern_modes")
        targets = _modes_0based(plan["targets"], n_modes, "targets")
        result = conditional_x2(
            solver.final_state_,
            pattern_modes,
            [int(v) for v in plan["pattern"]],
            targets,
            shots=int(plan.get("shots", 1000)),
            seed=cfg["seed"],
        )
        path = os.path.join(outdir, "conditional_x2.csv")
        rows = []
        for i, mode in enumerate(targets):
            rows.append(
                [
                    mode + 1,
                    result.exact[i],
                    result.sampled[i] if result.sampled else "",
                    result.stderr[i] if result.stderr else "",
                    result.shots,
                ]
            )
        _write_csv(path, ["mode", "exact_x2", "sampled_x2", "stderr", "shots"], rows)
        outputs["conditional_x2"] = "conditional_x2.csv"
    return outputs


def _write_simplex_frames(cfg, solver, outdir, frames_cfg) -> str:
    modes = _modes_0based(frames_cfg.get("modes", [1, 2, 3]),
                          solver.compiled_.n_modes, "simplex_frames.modes")
    shots = int(frames_cfg.get("shots", 1000))
    rows = []
    header = ["frame", "t", "shot"] + [f"x{m + 1}" for m in modes]
    for frame, t in enumerate(sorted(solver.trajectory_.captured_states)):
        state = solver.trajectory_.captured_states[t]
        record = homodyne_sample(state, modes, shots, cfg["seed"] + frame)
        for i, row in enumerate(record.samples):
            rows.append([frame, t, i] + list(row))
    path = os.path.join(outdir, "simplex_samples.csv")
    _write_csv(path, header, rows)
    return "simplex_samples.csv"


# ---------------------------------------------------------------------------
# sweep


def _sweep_point_config(cfg, axis, value) -> dict:
    point = copy.deepcopy(cfg)
    point["sweep"] = None
    if axis == "p0":
        point["initial_state"]["p0"] = float(value)
    elif axis == "total_time":
        sched = point["schedule"]
        policy = cfg["sweep"].get("steps_policy", "scale-with-T")
        if policy == "scale-with-T" and sched["variant"] == "continuous":
            ref_steps, ref_t = int(sched["steps"]), float(sched["total_time"])
            sched["steps"] = max(101, int(round(ref_steps * float(value) / ref_t)))
        sched["total_time"] = float(value)
    elif axis == "lambda":
        model = _load_problem(point)
        n_con = len(model.constraints)
        pen = dict(point.get("penalties") or {})
        pen["constraints"] = [float(value)] * n_con
        point["penalties"] = pen
    elif axis == "sigma":
        prob = point["problem"]
        if "id" not in prob or prob["id"] != "ms-integer":
            raise ConfigError("sigma sweeps require the ms-integer problem id")
        prob.setdefault("options", {})["sigma"] = int(value)
    return point


def _sweep_one(cfg_point):
    model = _load_problem(cfg_point)
    solver = _build_solver(cfg_point, model)
    tracked = cfg_point.get("tracked") or {}
    if tracked.get("modes", "all") != "all":
        compiled = compile_model(model, cfg_point.get("penalties"),
                                 slack_kind=cfg_point.get("slack_kind", "nonneg-integer"))
        solver.track_modes = _modes_0based(
            tracked["modes"], compiled.n_modes, "tracked.modes"
        )
    solver.fit(model)
    spec = _solutions_spec(cfg_point, model, solver)
    return _solution_metrics(cfg_point, model, solver, spec)


def sweep(config, outdir, seed=None, threads=None) -> dict:
    """Run one evolution per grid point and write ``summary.csv``."""
    cfg = resolve_config(config)
    if seed is not None:
        cfg["seed"] = int(seed)
    if not cfg.get("sweep"):
        raise ConfigError("config has no sweep axis")
    os.makedirs(outdir, exist_ok=True)
    started = time.time()
    axis = cfg["sweep"]["axis"]
    grid = [float(g) for g in cfg["sweep"]["grid"]]
    points = [_sweep_point_config(cfg, axis, g) for g in grid]

    workers = threads or int(os.environ.get(THREADS_ENV, 0)) or (os.cpu_count() or 1)
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_one, points))
    else:
        results = [_sweep_one(p) for p in points]

    labels = results[0]["labels"]
    header = (
        [axis]
        + labels
        + ["success", "std_dev", "bias", "total_probability"]
    )
    rows = []
    for g, res in zip(grid, results):
        if res["labels"] != labels:
            raise ConfigError("sweep points disagree on solution labels")
        rows.append(
            [g]
            + res["probs"]
            + [
                res["success"],
                res["std_dev"],
                res["bias"] if res["bias"] is not None else "",
                res["total"],
            ]
        )
    path = os.path.join(outdir, "summary.csv")
    _write_csv(path, header, rows)

    manifest = {
        "config": cfg,
        "seed": cfg["seed"],
        "version": __version__,
        "wall_time_s": time.time() - started,
        "outputs": {"summary": "summary.csv"},
        "rows": [dict(zip(header, row)) for row in rows],
    }
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")
    return manifest


# ---------------------------------------------------------------------------
# oracle


def oracle(config, outdir=None) -> dict:
    """Classical brute force vs spectral ground states, with a verdict."""
    cfg = resolve_config(config)
    model = _load_problem(cfg)
    solver = _build_solver(cfg, model)
    compiled = compile_model(model, cfg.get("penalties"),
                             slack_kind=cfg.get("slack_kind", "nonneg-integer"))
    space = solver._space(compiled.n_modes)

    kinds = {k for _, k in model.variables}
    int_names = [n for n, k in model.variables if k in (INTEGER, BINARY)]

    if kinds == {CONTINUOUS}:
        result = brute_force(model, grid_step=1.0 / 30.0)
    else:
        box = max(space.dims[compiled.mode_map[n]] for n in int_names) if int_names else 8
        result = brute_force(model, box=box)

    report = {
        "problem": cfg["problem"],
        "brute_force": {
            "optimal_value": result.optimal_value,
            "optima": [dict(sorted(a.items())) for a in result.optima],
            "points_searched": result.points_searched,
        },
    }

    agreement = None
    if int_names and not (kinds & {CONTINUOUS}):
        # diagonal Hamiltonian: compare minimizers and spectral ground space
        matrix = assemble(compiled.poly, space)
        diag = np.real(matrix.diagonal()) + compiled.constant_offset
        min_energy = diag.min()
        diag_minima = sorted(
            space.occupation_of(i)
            for i in np.flatnonzero(np.abs(diag - min_energy) < 1e-9)
        )
        slack_names = [n for n in compiled.model.names if n not in model.names]
        oracle_full = _extend_with_slacks(result, compiled, model, slack_names)
        report["compiled"] = {
            "min_energy": float(min_energy),
            "diagonal_minimizers": [list(o) for o in diag_minima],
        }
        count = min(len(diag_minima) + 1, 8)
        vals, vecs = ground_state(matrix, count=count)
        dominant = sorted(
            {
                space.occupation_of(int(np.argmax(np.abs(vecs[:, i]) ** 2)))
                for i in range(len(vals))
                if vals[i] < min_energy - compiled.constant_offset + 1e-6
            }
        )
        report["ground_state"] = {
            "eigenvalues": [float(v + compiled.constant_offset) for v in vals],
            "dominant_states": [list(o) for o in dominant],
        }
        agreement = diag_minima == oracle_full and set(dominant) <= set(diag_minima)
    report["agreement"] = agreement

    if outdir:
        os.makedirs(outdir, exist_ok=True)
        with open(os.path.join(outdir, "oracle.json"), "w") as fh:
            json.dump(report, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    return report


def _extend_with_slacks(result, compiled, model, slack_names):
    """Oracle optima extended with the implied slack values."""
    out = []
    for a in result.optima:
        full = dict(a)
        for name, con in zip(slack_names, _slack_constraints(compiled)):
            residual = con.rhs - con.lhs_poly().evaluate({**full, name: 0.0})
            full[name] = int(round(residual))
        out.append(tuple(int(full[n]) for n in compiled.model.names))
    return sorted(out)


def _slack_constraints(compiled):
    """Constraints that received a slack, in slack order."""
    original = set()
    for name, kind in compiled.model.variables:
        if name.startswith("slack"):
            original.add(name)
    out = []
    for con in compiled.model.constraints:
        names = con.variables()
        if names & original:
            out.append(con)
    return out
