"""Canned benchmark instances and an exhaustive classical oracle.

Vertices are 1-based in I/O (graph edge lists, variable names like ``n1``)
and 0-based internally (mode indices).  All constructors return MipModel
objects carrying their customary penalty weights, every one of which can
be overridden at compile time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .compiler import (
    BINARY,
    CONTINUOUS,
    EQ,
    INTEGER,
    LE,
    Constraint,
    MipModel,
    Polynomial,
)
from .errors import ConfigError, SearchSpaceError

MAX_SEARCH_POINTS = 10**8


@dataclass(frozen=True)
class GraphInstance:
    """Undirected graph with a symmetric 0/1 adjacency matrix."""

    n_vertices: int
    edges: tuple  # of 1-based (i, j) pairs

    def __post_init__(self):
        for i, j in self.edges:
            if not (1 <= i <= self.n_vertices and 1 <= j <= self.n_vertices) or i == j:
                raise ConfigError(f"edge ({i},{j}) invalid for |V|={self.n_vertices}")

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.n_vertices, self.n_vertices))
        for i, j in self.edges:
            a[i - 1, j - 1] = a[j - 1, i - 1] = 1.0
        return a

    def max_cliques(self):
        """All maximum cliques (1-based vertex tuples) by enumeration."""
        a = self.adjacency()
        best, cliques = 0, []
        for size in range(1, self.n_vertices + 1):
            for combo in itertools.combinations(range(self.n_vertices), size):
                if all(a[i, j] for i, j in itertools.combinations(combo, 2)):
                    if size > best:
                        best, cliques = size, []
                    if size == best:
                        cliques.append(tuple(v + 1 for v in combo))
        return best, tuple(cliques)


@dataclass(frozen=True)
class OracleResult:
    optimal_value: float
    optima: tuple  # of assignment dicts
    points_searched: int

    def optima_as_tuples(self, names=None):
        if names is None:
            names = sorted(self.optima[0]) if self.optima else ()
        return tuple(tuple(a[n] for n in names) for a in self.optima)


# ---------------------------------------------------------------------------
# instances


def feasibility_instance() -> MipModel:
    """Find all non-negative integer solutions of n1 + n2 = 5."""
    return MipModel(
        variables=(("n1", INTEGER), ("n2", INTEGER)),
        objective=Polynomial(),
        constraints=(
            Constraint(((1.0, (("n1", 1),)), (1.0, (("n2", 1),))), EQ, 5.0),
        ),
        penalties={"constraints": [1.0]},
        metadata={"family": "feasibility"},
    )


def knapsack_instance() -> MipModel:
    """Unbounded knapsack: maximize n1 + 2*n2 subject to 4*n1 + 1.5*n2 <= 11."""
    return MipModel(
        variables=(("n1", INTEGER), ("n2", INTEGER)),
        objective=Polynomial.build(
            (-1.0, (("n1", 1),)),
            (-2.0, (("n2", 1),)),
        ),
        constraints=(
            Constraint(((4.0, (("n1", 1),)), (1.5, (("n2", 1),))), LE, 11.0),
        ),
        penalties={"constraints": [4.0]},
        metadata={"family": "knapsack"},
    )


def maxclique_graph() -> GraphInstance:
    """Five-vertex instance with maximum cliques {1,2,4} and {1,3,4}."""
    return GraphInstance(5, ((1, 2), (1, 3), (1, 4), (2, 4), (2, 5), (3, 4)))


def _names(prefix, count):
    return tuple(f"{prefix}{i + 1}" for i in range(count))


def maxclique_binary_instance(graph=None, lam=1.0, mu=6.0) -> MipModel:
    """Binary quadratic clique search.

    The adjacency penalty lam * sum_{i != j} (1 - A_ij) n_i n_j is carried in
    the objective (it is a quadratic constraint, not a linear one); mu
    penalizes occupations beyond the binary subspace.
    """
    graph = graph or maxclique_graph()
    a = graph.adjacency()
    names = _names("n", graph.n_vertices)
    terms = [(-1.0, ((name, 1),)) for name in names]
    for i in range(graph.n_vertices):
        for j in range(graph.n_vertices):
            if i != j and not a[i, j]:
                terms.append((lam, ((names[i], 1), (names[j], 1))))
    return MipModel(
        variables=tuple((name, BINARY) for name in names),
        objective=Polynomial.build(*terms),
        penalties={"binary": mu},
        metadata={"family": "maxclique-binary", "lambda": lam},
    )


def ms_continuous_instance(graph=None, lam=2.0) -> MipModel:
    """Quadratic-program clique search over the probability simplex."""
    graph = graph or maxclique_graph()
    a = graph.adjacency()
    names = _names("x", graph.n_vertices)
    terms = []
    for i in range(graph.n_vertices):
        for j in range(graph.n_vertices):
            if a[i, j]:
                terms.append((-1.0, ((names[i], 1), (names[j], 1))))
    return MipModel(
        variables=tuple((name, CONTINUOUS) for name in names),
        objective=Polynomial.build(*terms),
        constraints=(
            Constraint(tuple((1.0, ((name, 1),)) for name in names), EQ, 1.0),
        ),
        penalties={"constraints": [lam]},
        metadata={"family": "ms-continuous"},
    )


def ms_integer_instance(sigma=3, graph=None, lam=6.0) -> MipModel:
    """Integer relaxation of the simplex clique search with sum n = sigma."""
    sigma = int(sigma)
    if sigma < 1:
        raise ConfigError(f"sigma must be >= 1, got {sigma}")
    graph = graph or maxclique_graph()
    a = graph.adjacency()
    names = _names("n", graph.n_vertices)
    terms = []
    for i in range(graph.n_vertices):
        for j in range(graph.n_vertices):
            if a[i, j]:
                terms.append((-1.0, ((names[i], 1), (names[j], 1))))
    return MipModel(
        variables=tuple((name, INTEGER) for name in names),
        objective=Polynomial.build(*terms),
        constraints=(
            Constraint(tuple((1.0, ((name, 1),)) for name in names), EQ, float(sigma)),
        ),
        penalties={"constraints": [lam]},
        metadata={"family": "ms-integer", "sigma": sigma},
    )


def sparse_instance(mu=(1.0, 0.3, 2.0), lambdas=(1.2, 0.3, 0.3)) -> MipModel:
    """Cardinality-constrained least squares with binary support selectors.

    minimize sum_i (x_i b_i - mu_i)^2  subject to  sum_i x_i b_i = 3 and
    sum_i b_i = 2.  Penalty weights: lambdas[0] and lambdas[1] for the two
    constraints, lambdas[2] for the binary-subspace penalty.
    """
    mu = tuple(float(v) for v in mu)
    if len(mu) != 3:
        raise ConfigError("sparse instance needs exactly three target constants")
    xs, bs = _names("x", 3), _names("b", 3)
    obj_terms = []
    for i in range(3):
        # (x_i b_i - mu_i)^2 = x_i^2 b_i^2 - 2 mu_i x_i b_i + mu_i^2
        obj_terms.append((1.0, ((xs[i], 2), (bs[i], 2))))
        obj_terms.append((-2.0 * mu[i], ((xs[i], 1), (bs[i], 1))))
        obj_terms.append((mu[i] ** 2, ()))
    return MipModel(
        variables=tuple((x, CONTINUOUS) for x in xs) + tuple((b, BINARY) for b in bs),
        objective=Polynomial.build(*obj_terms),
        constraints=(
            Constraint(
                tuple((1.0, ((xs[i], 1), (bs[i], 1))) for i in range(3)), EQ, 3.0
            ),
            Constraint(tuple((1.0, ((b, 1),)) for b in bs), EQ, 2.0),
        ),
        penalties={"constraints": [lambdas[0], lambdas[1]], "binary": lambdas[2]},
        metadata={"family": "sparse", "targets": mu},
    )


BENCHMARKS = {
    "feasibility": feasibility_instance,
    "knapsack": knapsack_instance,
    "maxclique-binary": maxclique_binary_instance,
    "ms-continuous": ms_continuous_instance,
    "ms-integer": ms_integer_instance,
    "sparse": sparse_instance,
}


def instance(problem_id, **kwargs) -> MipModel:
    if problem_id not in BENCHMARKS:
        raise ConfigError(
            f"unknown problem id {problem_id!r}; known: {sorted(BENCHMARKS)}"
        )
    return BENCHMARKS[problem_id](**kwargs)


# ---------------------------------------------------------------------------
# brute-force oracle


def _feasible(model: MipModel, assignment, tol=1e-9) -> bool:
    for con in model.constraints:
        lhs = con.lhs_poly().evaluate(assignment)
        if con.relation == EQ and abs(lhs - con.rhs) > tol:
            return False
        if con.relation == LE and lhs > con.rhs + tol:
            return False
    return True


def _simplex_structure(model: MipModel):
    """Detect a pure-continuous model with a single unit-sum equality."""
    if any(kind != CONTINUOUS for _, kind in model.variables):
        return None
    if len(model.constraints) != 1:
        return None
    con = model.constraints[0]
    if con.relation != EQ or not con.is_linear():
        return None
    names = []
    for coeff, vars_ in con.terms:
        if coeff != 1.0:
            return None
        names.append(vars_[0][0])
    if set(names) != set(model.names):
        return None
    return con.rhs


def _compositions(total, parts):
    """All tuples of ``parts`` non-negative ints summing to ``total``."""
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def brute_force(model: MipModel, box=8, grid_step=0.1, cmax=None) -> OracleResult:
    """Exhaustive minimization over an integer box and a continuous grid.

    Integer variables range over 0..box-1, binaries over {0,1}, continuous
    variables over multiples of ``grid_step`` in [0, cmax].  Assignments
    violating any constraint are discarded; all global optima are returned.
    Pure-continuous models constrained to a probability simplex are
    enumerated exactly on the lattice of multiples of ``grid_step``.
    """
    names = model.names

    simplex_rhs = _simplex_structure(model)
    if simplex_rhs is not None:
        units = int(round(simplex_rhs / grid_step))
        if abs(units * grid_step - simplex_rhs) < 1e-9:
            best, optima, count = np.inf, [], 0
            for combo in _compositions(units, len(names)):
                count += 1
                assignment = {
                    n: k * simplex_rhs / units for n, k in zip(names, combo)
                }
                value = model.objective.evaluate(assignment)
                if value < best - 1e-9:
                    best, optima = value, [assignment]
                elif abs(value - best) <= 1e-9:
                    optima.append(assignment)
            return OracleResult(best, tuple(optima), count)

    ranges = []
    for name, kind in model.variables:
        if kind == BINARY:
            ranges.append([0, 1])
        elif kind == INTEGER:
            ranges.append(list(range(int(box))))
        else:
            top = float(cmax) if cmax is not None else _continuous_bound(model, name)
            count = int(round(top / grid_step)) + 1
            ranges.append([k * grid_step for k in range(count)])
    total = int(np.prod([len(r) for r in ranges], dtype=float))
    if total > MAX_SEARCH_POINTS:
        raise SearchSpaceError(
            f"search space of {total} points exceeds the cap {MAX_SEARCH_POINTS}"
        )
    best = np.inf
    optima = []
    for values in itertools.product(*ranges):
        assignment = dict(zip(names, values))
        if not _feasible(model, assignment):
            continue
        value = model.objective.evaluate(assignment)
        if value < best - 1e-9:
            best = value
            optima = [assignment]
        elif abs(value - best) <= 1e-9:
            optima.append(assignment)
    if not optima:
        raise SearchSpaceError("no feasible point found inside the search box")
    return OracleResult(best, tuple(optima), total)


def _continuous_bound(model: MipModel, name) -> float:
    """Upper bound for one continuous variable from equality-sum constraints."""
    bounds = []
    for con in model.constraints:
        if con.relation != EQ:
            continue
        participates = any(
            any(n == name for n, _ in vars_) and coeff > 0 for coeff, vars_ in con.terms
        )
        # all-nonnegative lhs with positive coefficients bounds each member
        if participates and con.rhs > 0:
            bounds.append(con.rhs)
    return min(bounds) if bounds else 4.0


def continuous_completion(model: MipModel, binary_pattern) -> tuple:
    """Best continuous completion of a binary support pattern.

    For models whose objective is separable quadratic in the continuous
    variables with one linear coupling constraint (the sparse family), the
    minimizer given the active set is the Euclidean projection of the
    target vector onto the constraint plane, with negative entries clipped
    by active-set iteration.  Returns (assignment, value); raises
    ConfigError when the pattern violates a binary-only constraint.
    """
    cont = [n for n, k in model.variables if k == CONTINUOUS]
    bins = [n for n, k in model.variables if k == BINARY]
    if len(binary_pattern) != len(bins):
        raise ConfigError("binary pattern length mismatch")
    assignment = dict(zip(bins, (float(b) for b in binary_pattern)))
    for name in cont:
        assignment[name] = 0.0

    # check constraints that involve no continuous freedom under this pattern
    targets = dict(model.metadata.get("targets_by_name", {}))
    if not targets:
        mus = model.metadata.get("targets")
        if mus is not None:
            targets = {cont[i]: float(mus[i]) for i in range(len(cont))}

    active = [n for n, b in zip(bins, binary_pattern) if b]
    active_cont = [cont[bins.index(n)] for n in active]

    # locate the single coupling equality sum_i x_i b_i = rhs
    coupling = None
    for con in model.constraints:
        if con.relation == EQ and any(
            len(vars_) == 2 for _, vars_ in con.terms
        ):
            coupling = con
            break
    if coupling is None:
        raise ConfigError("no bilinear coupling constraint found")
    rhs = coupling.rhs

    for con in model.constraints:
        if con is coupling:
            continue
        lhs = con.lhs_poly().evaluate(assignment)
        if con.relation == EQ and abs(lhs - con.rhs) > 1e-9:
            raise ConfigError("binary pattern infeasible for the model")

    free = list(active_cont)
    if not free:
        raise ConfigError("pattern leaves no continuous freedom to meet the coupling")
    while True:
        shift = (rhs - sum(targets[n] for n in free)) / len(free)
        values = {n: targets[n] + shift for n in free}
        negative = [n for n, v in values.items() if v < -1e-12]
        if not negative:
            break
        for n in negative:
            free.remove(n)
        if not free:
            raise ConfigError("projection infeasible with non-negativity")
    for n in active_cont:
        assignment[n] = values.get(n, 0.0)
    return assignment, model.objective.evaluate(assignment)
