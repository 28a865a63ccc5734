import numpy as np
import pytest
from sklearn.base import clone

from bosonic_mip.benchmarks import feasibility_instance, sparse_instance
from bosonic_mip.compiler import model_to_dict
from bosonic_mip.errors import ConfigError
from bosonic_mip.solver import AdiabaticProgramSolver, coerce_model


def fast_solver(**overrides):
    params = dict(d=6, steps=201, total_time=20.0, snapshot_stride=50, seed=1)
    params.update(overrides)
    return AdiabaticProgramSolver(**params)


def test_get_params_roundtrip_and_clone():
    solver = fast_solver(p0=0.5)
    params = solver.get_params()
    assert params["p0"] == 0.5
    assert params["steps"] == 201
    twin = clone(solver)
    assert twin.get_params() == params
    solver.set_params(r=0.3)
    assert solver.r == 0.3


def test_coerce_model_variants(tmp_path):
    model = feasibility_instance()
    assert coerce_model(model) is model
    assert coerce_model("feasibility") == model
    assert coerce_model(model_to_dict(model)) == model
    path = tmp_path / "m.json"
    from bosonic_mip.compiler import save_model

    save_model(model, path)
    assert coerce_model(str(path)) == model
    with pytest.raises(ConfigError):
        coerce_model(3.14)


def test_predict_requires_fit():
    with pytest.raises(ConfigError):
        fast_solver().predict()


def test_fit_predict_feasibility():
    solver = fast_solver(total_time=50.0, steps=1001)
    solver.fit("feasibility")
    assert solver.final_state_.norm() == pytest.approx(1.0, abs=1e-6)
    decoded = solver.predict()
    assert decoded["n1"] + decoded["n2"] == 5
    success = solver.success_probability([(i, 5 - i) for i in range(6)])
    assert success > 0.5


def test_success_probability_and_ground_state():
    solver = fast_solver(total_time=50.0, steps=1001)
    solver.fit(feasibility_instance())
    vals, vecs = solver.ground_state(count=6)
    np.testing.assert_allclose(vals, vals[0], atol=1e-9)


def test_fit_determinism():
    a = fast_solver().fit("feasibility")
    b = fast_solver().fit("feasibility")
    np.testing.assert_array_equal(a.final_state_.amplitudes, b.final_state_.amplitudes)


def test_sparse_predict_structure():
    solver = AdiabaticProgramSolver(
        d=4, steps=501, total_time=30.0, snapshot_stride=100,
        track_modes=(3, 4, 5), max_leak=0.2, seed=0,
    )
    solver.fit(sparse_instance())
    assert solver.integer_marginal_.modes == (3, 4, 5)
    decoded = solver.predict()
    assert set(decoded) == {"x1", "x2", "x3", "b1", "b2", "b3"}
    for name in ("b1", "b2", "b3"):
        assert decoded[name] in (0, 1)
    for name in ("x1", "x2", "x3"):
        assert decoded[name] >= 0.0


def test_per_mode_dims():
    solver = fast_solver(d=[6, 7], steps=101, total_time=5.0)
    solver.fit("feasibility")
    assert solver.space_.dims == (6, 7)
    with pytest.raises(ConfigError):
        fast_solver(d=[6, 7, 8], steps=11, total_time=1.0).fit("feasibility")
