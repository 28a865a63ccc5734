"""Squeezed coherent product states and the momentum-displacing mixer.

The mixer ground state is a momentum eigenstate, which the simulator
approximates per mode by D(alpha) S(-r) |0> with alpha = i*p0/sqrt(2*hbar).
Positive ``r`` means the momentum variance is reduced by exp(-2r).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as la

from .errors import ConfigError, TruncationError
from .fock import ModeSpace, OperatorPoly, annihilation, p_op
from .validation import (
    broadcast_per_mode,
    check_dimension,
    check_hbar,
    check_unit_norm,
)

MAX_SQUEEZING = 2.0
DEFAULT_MAX_LEAK = 0.05


@dataclass(frozen=True)
class InitialStateSpec:
    """Per-mode momentum offsets p0 and squeezing parameters r."""

    p0: tuple
    r: tuple
    max_leak: float = DEFAULT_MAX_LEAK

    @staticmethod
    def uniform(p0, r, n_modes, max_leak=DEFAULT_MAX_LEAK) -> "InitialStateSpec":
        return InitialStateSpec(
            broadcast_per_mode(p0, n_modes, "p0"),
            broadcast_per_mode(r, n_modes, "r"),
            max_leak,
        )

    def __post_init__(self):
        object.__setattr__(self, "p0", tuple(float(v) for v in self.p0))
        object.__setattr__(self, "r", tuple(float(v) for v in self.r))
        if len(self.p0) != len(self.r):
            raise ConfigError("p0 and r must have the same number of modes")
        for r in self.r:
            if abs(r) > MAX_SQUEEZING:
                raise ConfigError(
                    f"|r| = {abs(r)} exceeds the supported squeezing bound {MAX_SQUEEZING}"
                )

    @property
    def n_modes(self) -> int:
        return len(self.p0)

    def alphas(self, hbar=1.0) -> tuple:
        hbar = check_hbar(hbar)
        return tuple(1j * p0 / np.sqrt(2.0 * hbar) for p0 in self.p0)


@dataclass
class QuantumState:
    """Complex amplitudes over the joint truncated Fock basis."""

    amplitudes: np.ndarray
    space: ModeSpace

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amp.size != self.space.total_dim:
            raise ConfigError(
                f"amplitude vector of length {amp.size} does not match "
                f"total dimension {self.space.total_dim}"
            )
        self.amplitudes = amp

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "QuantumState":
        return QuantumState(self.amplitudes / self.norm(), self.space)

    def reshaped(self) -> np.ndarray:
        return self.amplitudes.reshape(self.space.dims)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def overlap(self, other) -> complex:
        other_amp = other.amplitudes if isinstance(other, QuantumState) else other
        return complex(np.vdot(other_amp, self.amplitudes))

    def expectation(self, operator) -> float:
        return float(np.real(np.vdot(self.amplitudes, operator @ self.amplitudes)))


def _working_dimension(d) -> int:
    # enough headroom that amplitudes past the cut are converged at double precision
    return max(2 * d + 16, 32)


def squeezed_coherent(alpha, r, d, hbar=1.0, max_leak=DEFAULT_MAX_LEAK):
    """Single-mode D(alpha) S(-r) |0> amplitudes, truncated to ``d`` levels.

    The state is built by exponentiating the displacement and squeeze
    generators in a padded Fock space, then cut to ``d`` levels.  Returns
    ``(amplitudes, leak)`` where ``leak`` is the probability mass lost to
    the cut before renormalization.  Raises TruncationError when the leak
    exceeds ``max_leak``.
    """
    d = check_dimension(d)
    check_hbar(hbar)
    alpha = complex(alpha)
    r = float(r)
    if abs(r) > MAX_SQUEEZING:
        raise ConfigError(f"|r| = {abs(r)} exceeds the supported bound {MAX_SQUEEZING}")

    dw = _working_dimension(d)
    a = annihilation(dw)
    ad = a.T
    vac = np.zeros(dw, dtype=complex)
    vac[0] = 1.0

    z = -r
    squeeze = -(z / 2.0) * (ad @ ad) + (np.conj(z) / 2.0) * (a @ a)
    displace = alpha * ad - np.conj(alpha) * a
    full = la.expm(displace) @ (la.expm(squeeze) @ vac)

    cut = full[:d]
    kept = float(np.linalg.norm(cut) ** 2)
    leak = max(0.0, 1.0 - kept)
    if leak > max_leak:
        raise TruncationError(
            f"truncation to d={d} leaks {leak:.4f} of the state "
            f"(limit {max_leak}); increase d",
            leak=leak,
        )
    return cut / np.sqrt(kept), leak


def product_state(spec: InitialStateSpec, space: ModeSpace) -> QuantumState:
    """Tensor product of per-mode squeezed coherent states, renormalized."""
    if spec.n_modes != space.n_modes:
        raise ConfigError(
            f"spec covers {spec.n_modes} modes but the space has {space.n_modes}"
        )
    alphas = spec.alphas(space.hbar)
    amp = None
    for mode in range(space.n_modes):
        vec, _ = squeezed_coherent(
            alphas[mode], spec.r[mode], space.dims[mode], space.hbar, spec.max_leak
        )
        amp = vec if amp is None else np.kron(amp, vec)
    amp = amp / np.linalg.norm(amp)
    state = QuantumState(amp, space)
    check_unit_norm(state.amplitudes, 1e-9, "prepared state")
    return state


def mixing_hamiltonian(spec: InitialStateSpec, space: ModeSpace) -> OperatorPoly:
    """Sum over modes of p^2 - 2*p0*p (the constant p0^2 is omitted)."""
    if spec.n_modes != space.n_modes:
        raise ConfigError(
            f"spec covers {spec.n_modes} modes but the space has {space.n_modes}"
        )
    poly = OperatorPoly()
    for mode, p0 in enumerate(spec.p0):
        poly = poly + p_op(mode, 2)
        if p0 != 0.0:
            poly = poly + (-2.0 * p0) * p_op(mode)
    return poly
