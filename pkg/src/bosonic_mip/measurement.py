"""Solution extraction: Fock statistics, homodyne sampling, detector models.

Homodyne measurements are simulated mode by mode: the quadrature pdf of
the current conditional state is sampled by inverse transform on a fixed
grid, the state is projected onto the sampled quadrature eigenbra, and
the remaining modes carry on.  Per-shot RNG streams are independent
counter-based generators derived from the master seed, so parallel and
serial runs produce identical records.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ConfigError
from .fock import ModeSpace, projected_power, quadratures
from .states import QuantumState
from .validation import check_hbar, check_unit_norm

HOMODYNE_GRID_POINTS = 2001
CONDITION_PROB_FLOOR = 1e-9
_PROJECTION_FLOOR = 1e-12
_MAX_RESAMPLES = 64


# ---------------------------------------------------------------------------
# Fock-basis statistics


@dataclass
class FockDistribution:
    """Probabilities over a (possibly marginal) multi-mode Fock basis."""

    probs: np.ndarray  # shaped (d_1, ..., d_k) over `modes`
    modes: tuple  # original mode indices these axes refer to

    @property
    def dims(self) -> tuple:
        return self.probs.shape

    def total(self) -> float:
        return float(self.probs.sum())

    def prob(self, outcome) -> float:
        return float(self.probs[tuple(int(n) for n in outcome)])

    def as_dict(self, min_prob=0.0) -> dict:
        flat = self.probs.reshape(-1)
        out = {}
        for idx in range(flat.size):
            if flat[idx] > min_prob:
                out[tuple(int(v) for v in np.unravel_index(idx, self.dims))] = float(
                    flat[idx]
                )
        return out

    def top(self, k=8):
        flat = self.probs.reshape(-1)
        order = np.argsort(flat, kind="stable")[::-1][:k]
        return [
            (tuple(int(v) for v in np.unravel_index(int(i), self.dims)), float(flat[i]))
            for i in order
        ]

    def argmax(self) -> tuple:
        return self.top(1)[0][0]


def fock_probabilities(state: QuantumState, top_k=None) -> FockDistribution:
    """|<n|psi>|^2 over the full joint basis (optionally top-k filtered)."""
    probs = np.abs(state.reshaped()) ** 2
    dist = FockDistribution(probs, tuple(range(state.space.n_modes)))
    if top_k is not None:
        keep = dist.top(top_k)
        filtered = np.zeros_like(probs)
        for outcome, p in keep:
            filtered[outcome] = p
        dist = FockDistribution(filtered, dist.modes)
    return dist


def _resolve_keep(modes, keep):
    keep = tuple(sorted(int(m) for m in keep))
    if not keep:
        raise ConfigError("mode subset must be nonempty")
    if len(set(keep)) != len(keep) or any(m not in modes for m in keep):
        raise ConfigError(f"invalid mode subset {keep} of {modes}")
    return keep


def marginal(source, keep) -> FockDistribution:
    """Sum probabilities over all modes not in ``keep`` (diagonal trace-out)."""
    if isinstance(source, QuantumState):
        source = fock_probabilities(source)
    keep = _resolve_keep(source.modes, keep)
    axes = tuple(i for i, m in enumerate(source.modes) if m not in keep)
    probs = source.probs.sum(axis=axes) if axes else source.probs.copy()
    return FockDistribution(probs, keep)


def reduced_density(state: QuantumState, keep) -> np.ndarray:
    """Partial trace onto ``keep``; returns a dense density matrix."""
    keep = _resolve_keep(tuple(range(state.space.n_modes)), keep)
    dims = state.space.dims
    kept_dim = int(np.prod([dims[m] for m in keep]))
    if kept_dim > 4096:
        raise ConfigError(
            f"reduced density on subset of dimension {kept_dim} exceeds the dense cap"
        )
    drop = tuple(m for m in range(state.space.n_modes) if m not in keep)
    psi = np.moveaxis(state.reshaped(), keep + drop, range(state.space.n_modes))
    a = psi.reshape(kept_dim, -1)
    return a @ a.conj().T


# ---------------------------------------------------------------------------
# quadrature representation


def hermite_functions(n_levels, xs, hbar=1.0) -> np.ndarray:
    """Oscillator eigenfunctions psi_n(x), rows n = 0..n_levels-1.

    Stable upward recurrence on the normalized functions; includes the
    hbar^(-1/4) measure factor so that rows are orthonormal under dx.
    """
    hbar = check_hbar(hbar)
    xs = np.asarray(xs, dtype=float)
    xi = xs / np.sqrt(hbar)
    out = np.empty((n_levels, xs.size))
    out[0] = np.pi ** (-0.25) * np.exp(-0.5 * xi**2) * hbar ** (-0.25)
    if n_levels > 1:
        out[1] = np.sqrt(2.0) * xi * out[0]
    for n in range(1, n_levels - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * xi * out[n] - np.sqrt(
            n / (n + 1.0)
        ) * out[n - 1]
    return out


def default_grid(max_dim, hbar=1.0, points=HOMODYNE_GRID_POINTS) -> np.ndarray:
    """Symmetric grid wide enough for states up to ``max_dim`` levels."""
    hbar = check_hbar(hbar)
    x_max = max(6.0 * np.sqrt(hbar), np.sqrt(2.0 * hbar * max_dim))
    return np.linspace(-x_max, x_max, points)


def quadrature_pdf(rho, grid, hbar=1.0) -> np.ndarray:
    """Position-quadrature pdf of a single-mode density matrix on a grid."""
    rho = np.asarray(rho)
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ConfigError("grid must be a sorted 1-D array")
    phi = hermite_functions(rho.shape[0], grid, hbar)
    pdf = np.einsum("mg,mn,ng->g", phi, rho.real, phi)
    pdf = np.clip(pdf, 0.0, None)
    mass = float(np.trapezoid(pdf, grid))
    if mass < float(np.real(np.trace(rho))) - 1e-2:
        raise ConfigError(
            f"quadrature grid too narrow: captures {mass:.4f} of the state"
        )
    return pdf


def _inverse_cdf_sample(pdf, grid, u):
    """Inverse-transform sample from a tabulated pdf via cumulative trapezoid."""
    widths = np.diff(grid)
    increments = 0.5 * (pdf[1:] + pdf[:-1]) * widths
    cdf = np.concatenate(([0.0], np.cumsum(increments)))
    total = cdf[-1]
    target = u * total
    idx = int(np.searchsorted(cdf, target, side="right"))
    idx = min(max(idx, 1), grid.size - 1)
    span = cdf[idx] - cdf[idx - 1]
    frac = (target - cdf[idx - 1]) / span if span > 0 else 0.5
    return float(grid[idx - 1] + frac * (grid[idx] - grid[idx - 1]))


@dataclass
class HomodyneRecord:
    """Sampled x values per shot, in measurement order."""

    samples: np.ndarray  # (shots, len(mode_order))
    mode_order: tuple
    seed: int
    resampled: int = 0

    @property
    def shots(self) -> int:
        return int(self.samples.shape[0])


def _shot_rng(seed, shot) -> np.random.Generator:
    # counter-based stream per (seed, shot): parallel and serial runs agree
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(shot),))
    return np.random.Generator(np.random.Philox(ss))


def homodyne_sample(
    state: QuantumState, mode_order=None, shots=1000, seed=0, grid=None
) -> HomodyneRecord:
    """Sequential conditional homodyne sampling of the given modes."""
    if shots < 1:
        raise ConfigError("shots must be >= 1")
    space = state.space
    if mode_order is None:
        mode_order = tuple(range(space.n_modes))
    mode_order = tuple(int(m) for m in mode_order)
    if len(set(mode_order)) != len(mode_order):
        raise ConfigError("mode_order must not repeat modes")
    check_unit_norm(state.amplitudes, 1e-6, "state")
    if grid is None:
        grid = default_grid(max(space.dims[m] for m in mode_order), space.hbar)
    phi_cache = {
        d: hermite_functions(d, grid, space.hbar)
        for d in {space.dims[m] for m in mode_order}
    }

    samples = np.empty((shots, len(mode_order)))
    resampled = 0
    for shot in range(shots):
        rng = _shot_rng(seed, shot)
        for _attempt in range(_MAX_RESAMPLES):
            ok = _sample_one_shot(
                state, mode_order, grid, phi_cache, rng, samples[shot]
            )
            if ok:
                break
            resampled += 1
        else:
            raise ConditioningError("homodyne resampling limit exceeded")
    return HomodyneRecord(samples, mode_order, int(seed), resampled)


def _sample_one_shot(state, mode_order, grid, phi_cache, rng, out_row):
    space = state.space
    psi = state.reshaped().copy()
    remaining = list(range(space.n_modes))
    for col, mode in enumerate(mode_order):
        axis = remaining.index(mode)
        d = space.dims[mode]
        a = np.moveaxis(psi, axis, 0).reshape(d, -1)
        rho = a @ a.conj().T
        trace = float(np.real(np.trace(rho)))
        if trace < _PROJECTION_FLOOR:
            return False
        pdf = np.einsum("mg,mn,ng->g", phi_cache[d], rho.real / trace, phi_cache[d])
        pdf = np.clip(pdf, 0.0, None)
        x_star = _inverse_cdf_sample(pdf, grid, rng.uniform())
        out_row[col] = x_star
        weights = hermite_functions(d, np.array([x_star]), space.hbar)[:, 0]
        psi = np.tensordot(weights, psi, axes=(0, axis))
        remaining.pop(axis)
        nrm = np.linalg.norm(psi)
        if nrm < _PROJECTION_FLOOR:
            return False
        psi = psi / nrm
    return True


def threshold_bits(record: HomodyneRecord, n_vertices, hbar=1.0):
    """Map sampled x values to bits (x >= sqrt(hbar)/sqrt(2|V|)) and count patterns."""
    hbar = check_hbar(hbar)
    if record.shots < 1:
        raise ConfigError("record is empty")
    threshold = np.sqrt(hbar) / np.sqrt(2.0 * int(n_vertices))
    bits = (record.samples >= threshold).astype(int)
    patterns: dict = {}
    for row in bits:
        key = tuple(int(b) for b in row)
        patterns[key] = patterns.get(key, 0) + 1
    freqs = {k: v / record.shots for k, v in sorted(patterns.items())}
    return freqs, threshold


def threshold_projectors(d, threshold, grid, hbar=1.0):
    """Fock-basis projectors onto x >= threshold and its complement."""
    phi = hermite_functions(d, grid, hbar)
    mask = grid >= threshold
    pi_up = np.zeros((d, d))
    xs = grid[mask]
    block = phi[:, mask]
    for m in range(d):
        pi_up[m] = np.trapezoid(block[m] * block, xs, axis=1)
    pi_up = 0.5 * (pi_up + pi_up.T)
    return pi_up, np.eye(d) - pi_up


def exact_threshold_distribution(state: QuantumState, threshold, grid=None) -> dict:
    """Exact probability of every threshold bit pattern over all modes."""
    space = state.space
    if grid is None:
        grid = default_grid(max(space.dims), space.hbar, 4001)
    ups, downs = {}, {}
    for d in set(space.dims):
        ups[d], downs[d] = threshold_projectors(d, threshold, grid, space.hbar)
    n = space.n_modes
    out = {}
    for code in range(2**n):
        pattern = tuple((code >> (n - 1 - i)) & 1 for i in range(n))
        psi = state.reshaped()
        for axis, bit in enumerate(pattern):
            d = space.dims[axis]
            op = ups[d] if bit else downs[d]
            psi = np.moveaxis(np.tensordot(op, psi, axes=(1, axis)), 0, axis)
        out[pattern] = float(
            np.real(np.vdot(state.reshaped().reshape(-1), psi.reshape(-1)))
        )
    return out


# ---------------------------------------------------------------------------
# detector models and conditioning


def spad_success(dist: FockDistribution, bright_modes, zero_modes) -> float:
    """Probability of >=1 photon on every bright mode and 0 on every zero mode.

    Models threshold (click / no-click) detection; modes outside both sets
    are unconstrained.
    """
    bright = {int(m) for m in bright_modes}
    zeros = {int(m) for m in zero_modes}
    if not bright:
        raise ConfigError("bright mode set must be nonempty")
    if bright & zeros:
        raise ConfigError(f"bright and zero mode sets overlap: {sorted(bright & zeros)}")
    unknown = (bright | zeros) - set(dist.modes)
    if unknown:
        raise ConfigError(f"modes {sorted(unknown)} not in the distribution")
    total = 0.0
    flat = dist.probs.reshape(-1)
    for idx in range(flat.size):
        outcome = np.unravel_index(idx, dist.dims)
        keep = True
        for pos, mode in enumerate(dist.modes):
            if mode in bright and outcome[pos] < 1:
                keep = False
                break
            if mode in zeros and outcome[pos] != 0:
                keep = False
                break
        if keep:
            total += float(flat[idx])
    return total


def conditional_state(state: QuantumState, pattern_modes, pattern) -> tuple:
    """Project onto a Fock pattern of some modes; returns (state, probability)."""
    pattern_modes = tuple(int(m) for m in pattern_modes)
    pattern = tuple(int(n) for n in pattern)
    if len(pattern_modes) != len(pattern):
        raise ConfigError("pattern and pattern_modes length mismatch")
    space = state.space
    for m, n in zip(pattern_modes, pattern):
        if not 0 <= n < space.dims[m]:
            raise ConfigError(f"pattern value {n} outside truncation of mode {m}")
    index = [slice(None)] * space.n_modes
    for m, n in zip(pattern_modes, pattern):
        index[m] = n
    sub = state.reshaped()[tuple(index)]
    prob = float(np.sum(np.abs(sub) ** 2))
    if prob < CONDITION_PROB_FLOOR:
        raise ConditioningError(
            f"conditioning probability {prob:.3e} below {CONDITION_PROB_FLOOR}"
        )
    keep = [m for m in range(space.n_modes) if m not in pattern_modes]
    sub_space = ModeSpace(tuple(space.dims[m] for m in keep), space.hbar)
    return QuantumState(sub.reshape(-1) / np.sqrt(prob), sub_space), prob


@dataclass
class ConditionalX2Result:
    exact: tuple
    sampled: tuple | None
    stderr: tuple | None
    shots: int
    condition_probability: float


def conditional_x2(
    state: QuantumState,
    pattern_modes,
    pattern,
    target_modes,
    shots=None,
    seed=0,
) -> ConditionalX2Result:
    """<x^2> per target mode after conditioning on a Fock pattern.

    Exact operator expectations always; optionally also homodyne-sampled
    means of x^2 with standard errors when ``shots`` is given.
    """
    cond, prob = conditional_state(state, pattern_modes, pattern)
    pattern_modes = tuple(int(m) for m in pattern_modes)
    survivors = [m for m in range(state.space.n_modes) if m not in pattern_modes]
    local = []
    for m in target_modes:
        if int(m) not in survivors:
            raise ConfigError(f"target mode {m} was consumed by the conditioning")
        local.append(survivors.index(int(m)))

    exact = []
    for axis in local:
        rho = reduced_density(cond, (axis,))
        x2 = projected_power("X", cond.space.dims[axis], 2, cond.space.hbar)
        exact.append(float(np.real(np.trace(rho @ x2))))

    sampled = stderr = None
    if shots:
        record = homodyne_sample(cond, tuple(local), shots, seed)
        sq = record.samples**2
        sampled = tuple(float(v) for v in sq.mean(axis=0))
        stderr = tuple(float(v) for v in sq.std(axis=0, ddof=1) / np.sqrt(shots))
    return ConditionalX2Result(
        exact=tuple(exact),
        sampled=sampled,
        stderr=stderr,
        shots=int(shots or 0),
        condition_probability=prob,
    )


# ---------------------------------------------------------------------------
# fair-sampling metrics


@dataclass
class FairSamplingReport:
    solution_probs: tuple
    success: float
    std_dev: float
    bias: float | None
    total: float


def fairness_metrics(dist: FockDistribution, solution_sets) -> FairSamplingReport:
    """Spread statistics over degenerate solution probabilities.

    ``solution_sets`` is a list of outcome collections; each set's
    probability is the sum over its outcomes.  With exactly two sets the
    pairwise bias (P1 - P2) / (P1 + P2) is reported (None when undefined).
    """
    sets = [[tuple(int(v) for v in o) for o in s] for s in solution_sets]
    if sum(len(s) for s in sets) < 2:
        raise ConfigError("need at least two solution outcomes or two sets")
    probs = tuple(sum(dist.prob(o) for o in s) for s in sets)
    bias = None
    if len(probs) == 2:
        denom = probs[0] + probs[1]
        bias = (probs[0] - probs[1]) / denom if denom > 0 else None
    return FairSamplingReport(
        solution_probs=probs,
        success=float(sum(probs)),
        std_dev=float(np.std(probs)),
        bias=bias,
        total=dist.total(),
    )
