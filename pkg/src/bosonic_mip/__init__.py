"""Adiabatic mixed-integer optimization on truncated bosonic modes."""

__version__ = "0.1.0"

from .benchmarks import (
    GraphInstance,
    OracleResult,
    brute_force,
    feasibility_instance,
    instance,
    knapsack_instance,
    maxclique_binary_instance,
    maxclique_graph,
    ms_continuous_instance,
    ms_integer_instance,
    sparse_instance,
)
from .compiler import (
    CompiledProblem,
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
from .errors import (
    BosonicMipError,
    ConfigError,
    NumericError,
    PropagatorError,
    TruncationError,
)
from .evolution import (
    Schedule,
    Trajectory,
    evolve,
    evolve_continuous,
    evolve_trotter,
    ground_state,
    trotter_coefficients,
)
from .fock import (
    ModeSpace,
    OperatorPoly,
    annihilation,
    assemble,
    creation,
    embed,
    n_op,
    number,
    p_op,
    quadratures,
    x_op,
)
from .measurement import (
    FairSamplingReport,
    FockDistribution,
    HomodyneRecord,
    conditional_x2,
    fairness_metrics,
    fock_probabilities,
    homodyne_sample,
    marginal,
    quadrature_pdf,
    reduced_density,
    spad_success,
    threshold_bits,
)
from .solver import AdiabaticProgramSolver
from .states import (
    InitialStateSpec,
    QuantumState,
    mixing_hamiltonian,
    product_state,
    squeezed_coherent,
)

__all__ = [name for name in dir() if not name.startswith("_")]
