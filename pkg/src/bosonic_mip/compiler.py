"""Translate mixed-integer programs into problem-Hamiltonian polynomials.

Non-negative integers and binaries are encoded in number operators,
non-negative continuous variables in squared position operators, and
constraints become squared penalty terms.  Inequalities are converted to
equalities with non-negative slack variables after clearing fractional
coefficients row by row.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import lcm

import numpy as np

from .errors import (
    ConfigError,
    IntegerizationError,
    UnsupportedModelError,
)
from .fock import N, OperatorPoly, n_op, x_op
from .validation import check_finite, check_positive

INTEGER = "nonneg-integer"
BINARY = "binary"
CONTINUOUS = "nonneg-continuous"
VAR_KINDS = (INTEGER, BINARY, CONTINUOUS)

LE = "<="
EQ = "="

MODEL_SCHEMA_VERSION = 1

#: product of variables with powers: ((name, power), ...)
VarProduct = tuple


def _canon_product(vars_) -> VarProduct:
    merged: dict = {}
    for name, power in vars_:
        power = int(power)
        if power < 1:
            raise ConfigError(f"variable powers must be >= 1, got {power}")
        merged[str(name)] = merged.get(str(name), 0) + power
    return tuple(sorted(merged.items()))


@dataclass(frozen=True)
class Polynomial:
    """Real polynomial over named variables: sum of coeff * prod(var^power)."""

    terms: tuple = ()

    def __post_init__(self):
        merged: dict = {}
        for coeff, vars_ in self.terms:
            check_finite(coeff, "polynomial coefficient")
            key = _canon_product(vars_)
            merged[key] = merged.get(key, 0.0) + float(coeff)
        object.__setattr__(
            self,
            "terms",
            tuple(sorted(((v, k) for k, v in merged.items() if v != 0.0), key=lambda t: t[1])),
        )

    @staticmethod
    def build(*terms) -> "Polynomial":
        """Each term is (coeff, [(name, power), ...]) or (coeff,) for a constant."""
        return Polynomial(tuple((c, tuple(v)) for c, v in terms))

    def variables(self) -> set:
        return {name for _, vars_ in self.terms for name, _ in vars_}

    def __add__(self, other):
        return Polynomial(self.terms + other.terms)

    def evaluate(self, assignment) -> float:
        total = 0.0
        for coeff, vars_ in self.terms:
            value = coeff
            for name, power in vars_:
                value *= float(assignment[name]) ** power
            total += value
        return total


@dataclass(frozen=True)
class Constraint:
    """sum of coeff*prod(var^power) {<=,=} rhs."""

    terms: tuple
    relation: str
    rhs: float

    def __post_init__(self):
        if self.relation not in (LE, EQ):
            raise UnsupportedModelError(f"unsupported relation {self.relation!r}")
        merged: dict = {}
        for coeff, vars_ in self.terms:
            check_finite(coeff, "constraint coefficient")
            key = _canon_product(vars_)
            merged[key] = merged.get(key, 0.0) + float(coeff)
        object.__setattr__(
            self,
            "terms",
            tuple(sorted(((v, k) for k, v in merged.items()), key=lambda t: t[1])),
        )
        object.__setattr__(self, "rhs", check_finite(self.rhs, "constraint rhs"))

    def lhs_poly(self) -> Polynomial:
        return Polynomial(tuple((c, v) for c, v in self.terms))

    def variables(self) -> set:
        return {name for _, vars_ in self.terms for name, _ in vars_}

    def is_linear(self) -> bool:
        return all(len(vars_) == 1 and vars_[0][1] == 1 for _, vars_ in self.terms)


@dataclass(frozen=True)
class MipModel:
    """Variables, polynomial objective, constraints, and penalty weights."""

    variables: tuple  # of (name, kind)
    objective: Polynomial
    constraints: tuple = ()
    penalties: dict = field(default_factory=dict)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "metadata", _jsonify(self.metadata))
        object.__setattr__(self, "penalties", _jsonify(self.penalties))
        names = [name for name, _ in self.variables]
        if not names:
            raise ConfigError("a model needs at least one variable")
        if len(set(names)) != len(names):
            raise ConfigError("variable names must be unique")
        for name, kind in self.variables:
            if kind not in VAR_KINDS:
                raise UnsupportedModelError(f"unknown variable kind {kind!r} for {name!r}")
        known = set(names)
        unknown = self.objective.variables() - known
        if unknown:
            raise UnsupportedModelError(f"objective uses unknown variables {sorted(unknown)}")
        for con in self.constraints:
            unknown = con.variables() - known
            if unknown:
                raise UnsupportedModelError(
                    f"constraint uses unknown variables {sorted(unknown)}"
                )
        for key, weight in _iter_penalty_weights(self.penalties):
            check_positive(weight, f"penalty weight {key}")

    @property
    def names(self) -> tuple:
        return tuple(name for name, _ in self.variables)

    def kind_of(self, name) -> str:
        for vname, kind in self.variables:
            if vname == name:
                return kind
        raise ConfigError(f"unknown variable {name!r}")

    def has_inequalities(self) -> bool:
        return any(con.relation == LE for con in self.constraints)


def _jsonify(value):
    """Canonicalize nested containers to their JSON shapes (tuples -> lists)."""
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    return value


def _iter_penalty_weights(penalties):
    for key, value in penalties.items():
        if isinstance(value, (list, tuple)):
            for i, v in enumerate(value):
                yield f"{key}[{i}]", v
        else:
            yield key, value


@dataclass(frozen=True)
class CompiledProblem:
    """Operator polynomial for a model plus the bookkeeping around it."""

    poly: OperatorPoly
    mode_map: dict  # variable name -> mode index
    constant_offset: float
    model: MipModel  # slack-normalized model actually compiled
    penalties: dict

    @property
    def n_modes(self) -> int:
        return len(self.mode_map)

    def mode_names(self) -> tuple:
        inverse = {mode: name for name, mode in self.mode_map.items()}
        return tuple(inverse[m] for m in range(len(inverse)))

    def penalized_value(self, assignment) -> float:
        """Classical energy of an assignment, including the constant offset.

        For pure integer/binary assignments this equals the corresponding
        diagonal entry of the assembled Hamiltonian.
        """
        total = self.model.objective.evaluate(assignment)
        weights = self.penalties.get("constraints", ())
        for con, lam in zip(self.model.constraints, weights):
            total += lam * (con.lhs_poly().evaluate(assignment) - con.rhs) ** 2
        mu = self.penalties.get("binary", 0.0)
        if mu:
            for name, kind in self.model.variables:
                if kind == BINARY:
                    v = float(assignment[name])
                    total += mu * v * (v - 1.0)
        return total


# ---------------------------------------------------------------------------
# slack insertion


_RATIONAL_CAP = 10**4
_RATIONAL_TOL = 1e-9


def _as_fraction(value) -> Fraction:
    frac = Fraction(value).limit_denominator(_RATIONAL_CAP)
    if abs(float(frac) - value) > _RATIONAL_TOL * max(1.0, abs(value)):
        raise IntegerizationError(
            f"coefficient {value!r} is not a small-denominator rational; "
            "cannot integerize the constraint row"
        )
    return frac


def insert_slacks(model: MipModel, slack_kind=INTEGER) -> MipModel:
    """Rewrite every inequality as an equality with a fresh slack variable.

    Rows with fractional coefficients (or rhs) are first multiplied by the
    least common multiple of the denominators so that the slack can live on
    an integer-valued mode.
    """
    if slack_kind not in (INTEGER, CONTINUOUS):
        raise ConfigError(f"slack kind must be integer or continuous, got {slack_kind!r}")
    variables = list(model.variables)
    constraints = []
    existing = set(model.names)
    slack_count = 0
    for con in model.constraints:
        if con.relation == EQ:
            constraints.append(con)
            continue
        fractions = [_as_fraction(c) for c, _ in con.terms] + [_as_fraction(con.rhs)]
        scale_ = lcm(*(f.denominator for f in fractions)) if fractions else 1
        terms = tuple((c * scale_, v) for c, v in con.terms)
        rhs = con.rhs * scale_
        while f"slack{slack_count}" in existing:
            slack_count += 1
        slack = f"slack{slack_count}"
        slack_count += 1
        existing.add(slack)
        variables.append((slack, slack_kind))
        constraints.append(
            Constraint(terms + ((1.0, ((slack, 1),)),), EQ, rhs)
        )
    return replace(
        model, variables=tuple(variables), constraints=tuple(constraints)
    )


# ---------------------------------------------------------------------------
# compilation


def _variable_op(name, kind, power, mode) -> OperatorPoly:
    if kind in (INTEGER, BINARY):
        return n_op(mode, power)
    if kind == CONTINUOUS:
        # non-negativity via the x -> x^2 substitution
        return x_op(mode, 2 * power)
    raise UnsupportedModelError(f"unknown variable kind {kind!r}")


def _poly_to_operators(poly: Polynomial, model: MipModel, mode_map) -> OperatorPoly:
    out = OperatorPoly()
    for coeff, vars_ in poly.terms:
        term = OperatorPoly.constant(coeff)
        for name, power in vars_:
            term = term * _variable_op(name, model.kind_of(name), power, mode_map[name])
        out = out + term
    return out


def resolve_penalties(model: MipModel, penalties=None) -> dict:
    """Merge explicit penalties over the model's own, filling defaults."""
    merged = dict(model.penalties)
    if penalties:
        merged.update(penalties)
    n_con = len(model.constraints)
    weights = merged.get("constraints", merged.get("lambda", 1.0))
    if np.isscalar(weights):
        weights = [float(weights)] * n_con
    else:
        weights = [float(w) for w in weights]
    if len(weights) != n_con:
        raise ConfigError(
            f"{len(weights)} constraint penalty weights for {n_con} constraints"
        )
    out = {"constraints": tuple(weights)}
    if any(kind == BINARY for _, kind in model.variables):
        out["binary"] = float(merged.get("binary", merged.get("mu", 1.0)))
        check_positive(out["binary"], "binary penalty")
    for w in weights:
        check_positive(w, "constraint penalty")
    return out


def compile_model(model: MipModel, penalties=None, slack_kind=INTEGER) -> CompiledProblem:
    """Compile a model to an operator polynomial.

    The result is  objective  +  sum_c lambda_c (lhs_c - rhs_c)^2  +
    mu * sum_binaries n(n-1),  with continuous variables substituted by
    x^2 and any scalar left-over folded into ``constant_offset``.
    """
    normalized = insert_slacks(model, slack_kind) if model.has_inequalities() else model
    weights = resolve_penalties(normalized, penalties)
    mode_map = {name: mode for mode, name in enumerate(normalized.names)}

    poly = _poly_to_operators(normalized.objective, normalized, mode_map)
    for con, lam in zip(normalized.constraints, weights["constraints"]):
        lhs = _poly_to_operators(con.lhs_poly(), normalized, mode_map)
        poly = poly + lam * (lhs - con.rhs) ** 2
    mu = weights.get("binary", 0.0)
    for name, kind in normalized.variables:
        if kind == BINARY:
            mode = mode_map[name]
            poly = poly + mu * (n_op(mode, 2) - n_op(mode))

    operator, offset = poly.split_constant()
    return CompiledProblem(
        poly=operator,
        mode_map=mode_map,
        constant_offset=offset,
        model=normalized,
        penalties=weights,
    )


def scale(poly: OperatorPoly, factor) -> OperatorPoly:
    """Multiply all coefficients by a positive factor (argmin-preserving)."""
    factor = float(factor)
    if not np.isfinite(factor) or factor <= 0:
        raise ConfigError(f"scale factor must be > 0, got {factor}")
    return factor * poly


# ---------------------------------------------------------------------------
# penalty validation


@dataclass(frozen=True)
class PenaltyReport:
    level: str  # "ok" | "warning" | "advisory"
    messages: tuple

    @property
    def ok(self) -> bool:
        return self.level == "ok"


def validate_penalties(model: MipModel, penalties=None) -> PenaltyReport:
    """Check penalty weights against the known sufficient bounds.

    Only the binary clique-search family has proven bounds (lambda > 1/2,
    mu > 1); for any other family the report is advisory.
    """
    family = model.metadata.get("family", "")
    if family != "maxclique-binary":
        return PenaltyReport(
            "advisory",
            ("no penalty bounds known for this model family; weights unchecked",),
        )
    merged = dict(model.penalties)
    if penalties:
        merged.update(penalties)
    lam = float(merged.get("lambda", model.metadata.get("lambda", 0.0)))
    mu = float(merged.get("binary", merged.get("mu", 0.0)))
    messages = []
    if lam <= 0.5:
        messages.append(
            f"lambda = {lam} violates the sufficient bound lambda > 1/2 for clique penalties"
        )
    if mu <= 1.0:
        messages.append(
            f"mu = {mu} violates the sufficient bound mu > 1 for the binary-subspace penalty"
        )
    if messages:
        return PenaltyReport("warning", tuple(messages))
    return PenaltyReport("ok", ())


# ---------------------------------------------------------------------------
# JSON model format (schema version 1)


def model_to_dict(model: MipModel) -> dict:
    def product_json(vars_):
        return [{"name": n, "power": p} for n, p in vars_]

    return {
        "schema_version": MODEL_SCHEMA_VERSION,
        "variables": [{"name": n, "kind": k} for n, k in model.variables],
        "objective": {
            "terms": [
                {"coeff": c, "vars": product_json(v)} for c, v in model.objective.terms
            ]
        },
        "constraints": [
            {
                "terms": [{"coeff": c, "vars": product_json(v)} for c, v in con.terms],
                "relation": con.relation,
                "rhs": con.rhs,
            }
            for con in model.constraints
        ],
        "penalties": {
            k: (list(v) if isinstance(v, (list, tuple)) else v)
            for k, v in model.penalties.items()
        },
        "metadata": dict(model.metadata),
    }


def _product_from_json(vars_json, where):
    out = []
    for entry in vars_json:
        if "name" not in entry:
            raise ConfigError(f"{where}: variable reference needs a 'name'")
        out.append((str(entry["name"]), int(entry.get("power", 1))))
    return tuple(out)


def model_from_dict(data: dict) -> MipModel:
    if not isinstance(data, dict):
        raise ConfigError("model document must be a JSON object")
    version = data.get("schema_version")
    if version != MODEL_SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported model schema_version {version!r}; expected {MODEL_SCHEMA_VERSION}"
        )
    try:
        variables = tuple(
            (str(v["name"]), str(v["kind"])) for v in data["variables"]
        )
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"invalid 'variables' section: {exc}")
    obj_terms = []
    for term in data.get("objective", {}).get("terms", []):
        obj_terms.append(
            (float(term["coeff"]), _product_from_json(term.get("vars", []), "objective"))
        )
    constraints = []
    for con in data.get("constraints", []):
        terms = tuple(
            (float(t["coeff"]), _product_from_json(t.get("vars", []), "constraint"))
            for t in con["terms"]
        )
        constraints.append(Constraint(terms, str(con["relation"]), float(con["rhs"])))
    return MipModel(
        variables=variables,
        objective=Polynomial(tuple(obj_terms)),
        constraints=tuple(constraints),
        penalties=dict(data.get("penalties", {})),
        metadata=dict(data.get("metadata", {})),
    )


def save_model(model: MipModel, path):
    with open(path, "w") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path) -> MipModel:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"model file {path} is not valid JSON: {exc}")
    return model_from_dict(data)
