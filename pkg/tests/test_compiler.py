import itertools

import numpy as np
import pytest

from bosonic_mip.benchmarks import (
    feasibility_instance,
    knapsack_instance,
    maxclique_binary_instance,
    ms_continuous_instance,
    ms_integer_instance,
    sparse_instance,
)
from bosonic_mip.compiler import (
    EQ,
    LE,
    Constraint,
    MipModel,
    Polynomial,
    compile_model,
    insert_slacks,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    scale,
    validate_penalties,
)
from bosonic_mip.errors import (
    ConfigError,
    IntegerizationError,
    UnsupportedModelError,
)
from bosonic_mip.fock import ModeSpace, assemble, n_op, x_op


def test_insert_slacks_lcd():
    model = knapsack_instance()
    normalized = insert_slacks(model)
    (con,) = normalized.constraints
    assert con.relation == EQ
    assert con.rhs == 22.0
    terms = {vars_: coeff for coeff, vars_ in con.terms}
    assert terms[(("n1", 1),)] == 8.0
    assert terms[(("n2", 1),)] == 3.0
    assert terms[(("slack0", 1),)] == 1.0
    assert normalized.variables[-1] == ("slack0", "nonneg-integer")


def test_insert_slacks_integer_row_unscaled():
    model = MipModel(
        variables=(("n1", "nonneg-integer"), ("n2", "nonneg-integer")),
        objective=Polynomial(),
        constraints=(
            Constraint(((1.0, (("n1", 1),)), (1.0, (("n2", 1),))), LE, 5.0),
        ),
    )
    (con,) = insert_slacks(model).constraints
    assert con.rhs == 5.0
    assert {c for c, _ in con.terms} == {1.0}


def test_insert_slacks_equality_unchanged():
    model = feasibility_instance()
    assert insert_slacks(model) == model


def test_insert_slacks_irrational_rejected():
    model = MipModel(
        variables=(("n1", "nonneg-integer"),),
        objective=Polynomial(),
        constraints=(Constraint(((np.sqrt(2), (("n1", 1),)),), LE, 3.0),),
    )
    with pytest.raises(IntegerizationError):
        insert_slacks(model)


def test_continuous_slack_variant():
    model = knapsack_instance()
    normalized = insert_slacks(model, slack_kind="nonneg-continuous")
    assert normalized.variables[-1] == ("slack0", "nonneg-continuous")
    compiled = compile_model(normalized)
    # continuous slack enters through x^2
    prims = compiled.poly.primitives_used()
    assert "X" in prims


def test_compile_feasibility_poly():
    compiled = compile_model(feasibility_instance())
    expected = (
        n_op(0, 2) + n_op(1, 2) + 2.0 * (n_op(0) * n_op(1))
        - 10.0 * n_op(0) - 10.0 * n_op(1)
    )
    assert compiled.poly == expected
    assert compiled.constant_offset == 25.0
    assert compiled.mode_map == {"n1": 0, "n2": 1}


def test_compiled_diagonal_matches_classical_energy():
    compiled = compile_model(feasibility_instance())
    space = ModeSpace((8, 8))
    diag = np.real(assemble(compiled.poly, space).diagonal()) + compiled.constant_offset
    for n1, n2 in itertools.product(range(8), range(8)):
        classical = compiled.penalized_value({"n1": n1, "n2": n2})
        assert diag[space.index_of((n1, n2))] == pytest.approx(classical, abs=1e-9)
    assert compiled.penalized_value({"n1": 2, "n2": 3}) == 0.0
    assert compiled.penalized_value({"n1": 0, "n2": 0}) == 25.0


def test_feasibility_suppression():
    compiled = compile_model(feasibility_instance())
    for n1, n2 in itertools.product(range(8), range(8)):
        if n1 + n2 != 5:
            assert compiled.penalized_value({"n1": n1, "n2": n2}) >= 1.0


def test_maxclique_compiled_energies():
    model = maxclique_binary_instance(lam=1.0, mu=6.0)
    compiled = compile_model(model)
    energies = {}
    for bits in itertools.product((0, 1), repeat=5):
        assignment = {f"n{i + 1}": b for i, b in enumerate(bits)}
        energies[bits] = compiled.penalized_value(assignment)
    best = min(energies.values())
    winners = sorted(b for b, e in energies.items() if abs(e - best) < 1e-9)
    assert best == pytest.approx(-3.0)
    assert winners == [(1, 0, 1, 1, 0), (1, 1, 0, 1, 0)]
    # compiled diagonal agrees on the binary block
    space = ModeSpace((2,) * 5)
    diag = np.real(assemble(compiled.poly, space).diagonal())
    for bits, energy in energies.items():
        assert diag[space.index_of(bits)] == pytest.approx(energy, abs=1e-9)


def test_sparse_compiles_to_documented_operator():
    compiled = compile_model(sparse_instance())
    mu = (1.0, 0.3, 2.0)
    lam1, lam2, lam3 = 1.2, 0.3, 0.3
    x2n = [x_op(i, 2) * n_op(i + 3) for i in range(3)]
    expected = sum(
        ((x2n[i] - mu[i]) ** 2 for i in range(3)), start=n_op(0) * 0.0
    )
    expected = expected + lam1 * (x2n[0] + x2n[1] + x2n[2] - 3.0) ** 2
    nsum = n_op(3) + n_op(4) + n_op(5)
    expected = expected + lam2 * (nsum - 2.0) ** 2
    for i in range(3):
        expected = expected + lam3 * (n_op(i + 3, 2) - n_op(i + 3))
    operator, offset = expected.split_constant()
    assert compiled.poly == operator
    assert compiled.constant_offset == pytest.approx(offset)
    assert compiled.mode_map == {
        "x1": 0, "x2": 1, "x3": 2, "b1": 3, "b2": 4, "b3": 5,
    }


def test_scale_preserves_argmin():
    compiled = compile_model(ms_integer_instance(sigma=3), penalties=None)
    space = ModeSpace((3,) * 5)
    base = assemble(compiled.poly, space).toarray()
    vals0, vecs0 = np.linalg.eigh(base)
    ground0 = np.argmax(np.abs(vecs0[:, 0]))
    for factor in (0.25, 0.5, 2.0):
        scaled = assemble(scale(compiled.poly, factor), space).toarray()
        vals, vecs = np.linalg.eigh(scaled)
        assert np.argmax(np.abs(vecs[:, 0])) == ground0
        assert vals[0] == pytest.approx(factor * vals0[0], rel=1e-9)


def test_scale_rejects_nonpositive():
    with pytest.raises(ConfigError):
        scale(n_op(0), 0.0)
    with pytest.raises(ConfigError):
        scale(n_op(0), -1.0)


def test_validate_penalties():
    model = maxclique_binary_instance(lam=1.0, mu=6.0)
    assert validate_penalties(model).ok
    weak = maxclique_binary_instance(lam=0.4, mu=6.0)
    report = validate_penalties(weak)
    assert report.level == "warning"
    assert "1/2" in report.messages[0]
    advisory = validate_penalties(knapsack_instance())
    assert advisory.level == "advisory"


def test_unknown_variable_rejected():
    with pytest.raises(UnsupportedModelError):
        MipModel(
            variables=(("n1", "nonneg-integer"),),
            objective=Polynomial.build((1.0, (("bogus", 1),))),
        )


def test_bad_relation_rejected():
    with pytest.raises(UnsupportedModelError):
        Constraint(((1.0, (("n1", 1),)),), ">=", 0.0)


def test_model_json_roundtrip(tmp_path):
    for model in (
        feasibility_instance(),
        knapsack_instance(),
        maxclique_binary_instance(),
        ms_continuous_instance(),
        ms_integer_instance(sigma=4),
        sparse_instance(),
    ):
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        assert loaded == model


def test_model_json_schema_errors():
    with pytest.raises(ConfigError):
        model_from_dict({"schema_version": 99, "variables": []})
    data = model_to_dict(feasibility_instance())
    del data["variables"]
    with pytest.raises(ConfigError):
        model_from_dict(dict(data, variables=[{"kind": "nonneg-integer"}]))


def test_penalty_weight_validation():
    model = feasibility_instance()
    with pytest.raises(ConfigError):
        compile_model(model, penalties={"constraints": [-1.0]})
    with pytest.raises(ConfigError):
        compile_model(model, penalties={"constraints": [1.0, 2.0]})
