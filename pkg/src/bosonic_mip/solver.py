"""Estimator-style front end: fit a solver to a model, read off solutions.

The solver composes the functional layers (compile, prepare, evolve,
measure) behind a scikit-learn estimator surface, so hyperparameter
sweeps can reuse ``get_params`` / ``set_params`` / ``clone``.
"""

from __future__ import annotations

import numbers

import numpy as np
from sklearn.base import BaseEstimator

from .benchmarks import instance
from .compiler import (
    BINARY,
    CONTINUOUS,
    MipModel,
    compile_model,
    load_model,
    model_from_dict,
    scale,
)
from .errors import ConfigError
from .evolution import Schedule, evolve, ground_state as _ground_state
from .fock import ModeSpace, assemble
from .measurement import (
    conditional_x2,
    fock_probabilities,
    marginal,
)
from .states import InitialStateSpec, mixing_hamiltonian, product_state
from .validation import broadcast_per_mode


def coerce_model(source) -> MipModel:
    """Accept a MipModel, a benchmark id, a model dict, or a JSON path."""
    if isinstance(source, MipModel):
        return source
    if isinstance(source, dict):
        return model_from_dict(source)
    if isinstance(source, str):
        try:
            return instance(source)
        except ConfigError:
            return load_model(source)
    raise ConfigError(f"cannot interpret {type(source).__name__} as a model")


class AdiabaticProgramSolver(BaseEstimator):
    """Adiabatic ground-state search over truncated bosonic modes.

    Parameters mirror the experiment knobs: per-mode truncation ``d``,
    initial-state momentum offset ``p0`` and squeezing ``r``, the schedule
    (``total_time``, ``variant``, ``steps`` or ``trotter_steps``), penalty
    overrides, and a problem-Hamiltonian scale factor.

    After ``fit`` the instance exposes ``compiled_``, ``trajectory_``,
    ``distribution_`` and ``integer_marginal_``; ``predict`` decodes the
    most probable assignment.
    """

    def __init__(
        self,
        d=8,
        hbar=1.0,
        p0=0.72,
        r=0.8,
        total_time=50.0,
        variant="continuous",
        steps=10001,
        trotter_steps=300,
        snapshot_stride=10,
        penalties=None,
        scale_factor=1.0,
        max_leak=0.05,
        track_modes=None,
        method="auto",
        slack_kind="nonneg-integer",
        seed=0,
    ):
        self.d = d
        self.hbar = hbar
        self.p0 = p0
        self.r = r
        self.total_time = total_time
        self.variant = variant
        self.steps = steps
        self.trotter_steps = trotter_steps
        self.snapshot_stride = snapshot_stride
        self.penalties = penalties
        self.scale_factor = scale_factor
        self.max_leak = max_leak
        self.track_modes = track_modes
        self.method = method
        self.slack_kind = slack_kind
        self.seed = seed

    # -- assembly helpers ---------------------------------------------------
    def _space(self, n_modes) -> ModeSpace:
        if isinstance(self.d, numbers.Integral):
            dims = (int(self.d),) * n_modes
        else:
            dims = tuple(int(v) for v in self.d)
            if len(dims) != n_modes:
                raise ConfigError(
                    f"d has {len(dims)} entries but the compiled model has {n_modes} modes"
                )
        return ModeSpace(dims, self.hbar)

    def schedule(self) -> Schedule:
        return Schedule(
            total_time=self.total_time,
            variant=self.variant,
            steps=self.steps,
            trotter_steps=self.trotter_steps,
            snapshot_stride=self.snapshot_stride,
        )

    # -- estimator API --------------------------------------------------------
    def fit(self, X, y=None, state_times=()):
        """Compile the model, prepare the mixer ground state, and evolve."""
        model = coerce_model(X)
        self.model_ = model
        self.compiled_ = compile_model(model, self.penalties, slack_kind=self.slack_kind)
        n_modes = self.compiled_.n_modes
        self.space_ = self._space(n_modes)

        spec = InitialStateSpec.uniform(
            broadcast_per_mode(self.p0, n_modes, "p0"),
            broadcast_per_mode(self.r, n_modes, "r"),
            n_modes,
            max_leak=self.max_leak,
        )
        self.initial_spec_ = spec
        self.mixer_poly_ = mixing_hamiltonian(spec, self.space_)
        poly = self.compiled_.poly
        if self.scale_factor != 1.0:
            poly = scale(poly, self.scale_factor)
        self.problem_poly_ = poly

        psi0 = product_state(spec, self.space_)
        self.trajectory_ = evolve(
            self.mixer_poly_,
            poly,
            psi0,
            self.schedule(),
            track_modes=self.track_modes,
            state_times=state_times,
            method=self.method,
        )
        self.final_state_ = self.trajectory_.final_state
        self.distribution_ = fock_probabilities(self.final_state_)

        integer_modes = self._integer_modes()
        self.integer_marginal_ = (
            marginal(self.distribution_, integer_modes) if integer_modes else None
        )
        return self

    def _check_fitted(self):
        if not hasattr(self, "final_state_"):
            raise ConfigError("solver is not fitted yet; call fit first")

    def _integer_modes(self):
        return tuple(
            self.compiled_.mode_map[name]
            for name, kind in self.compiled_.model.variables
            if kind in (BINARY, "nonneg-integer")
        )

    def predict(self, X=None) -> dict:
        """Decode the most probable assignment from the final state.

        Integer and binary variables come from the argmax of their joint
        marginal; continuous variables from ``<x^2>`` conditioned on that
        pattern (zero when their selector binary is off, matching the
        x -> x^2 encoding).
        """
        self._check_fitted()
        mode_map = self.compiled_.mode_map
        model = self.compiled_.model
        out = {}
        pattern_modes, pattern = (), ()
        if self.integer_marginal_ is not None:
            pattern_modes = self.integer_marginal_.modes
            pattern = self.integer_marginal_.argmax()
            for name, kind in model.variables:
                if kind in (BINARY, "nonneg-integer"):
                    out[name] = int(pattern[pattern_modes.index(mode_map[name])])
        cont = [(n, mode_map[n]) for n, k in model.variables if k == CONTINUOUS]
        if cont:
            result = conditional_x2(
                self.final_state_,
                pattern_modes,
                pattern,
                [m for _, m in cont],
                shots=None,
            )
            for (name, _), value in zip(cont, result.exact):
                out[name] = float(value)
        return out

    def success_probability(self, solutions) -> float:
        """Total probability of the given integer-marginal outcomes."""
        self._check_fitted()
        dist = self.integer_marginal_ or self.distribution_
        return float(sum(dist.prob(o) for o in solutions))

    def ground_state(self, count=1):
        """Lowest eigenpairs of the compiled problem Hamiltonian."""
        self._check_fitted()
        return _ground_state(assemble(self.problem_poly_, self.space_), count)
