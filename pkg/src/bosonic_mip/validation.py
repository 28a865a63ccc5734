"""Input validation helpers used across the public API surface."""

from __future__ import annotations

import numbers

import numpy as np

from .errors import ConfigError, InvalidDimensionError

_NORM_TOL = 1e-6


def check_dims(dims) -> tuple[int, ...]:
    """Coerce per-mode truncation dimensions to a tuple of ints >= 2."""
    if isinstance(dims, numbers.Integral):
        dims = (int(dims),)
    try:
        out = tuple(int(d) for d in dims)
    except TypeError:
        raise ConfigError(f"dims must be an int or an iterable of ints, got {dims!r}")
    if not out:
        raise ConfigError("at least one mode is required")
    for d in out:
        if d < 2:
            raise InvalidDimensionError(f"every truncation dimension must be >= 2, got {d}")
    return out


def check_dimension(d) -> int:
    d = int(d)
    if d < 2:
        raise InvalidDimensionError(f"truncation dimension must be >= 2, got {d}")
    return d


def check_hbar(hbar) -> float:
    hbar = float(hbar)
    if not np.isfinite(hbar) or hbar <= 0:
        raise ConfigError(f"hbar must be a positive finite real, got {hbar}")
    return hbar


def check_mode_index(mode, n_modes) -> int:
    mode = int(mode)
    if not 0 <= mode < n_modes:
        raise ConfigError(f"mode index {mode} out of range for {n_modes} modes")
    return mode


def check_unit_norm(vec, tol=_NORM_TOL, what="state"):
    nrm = float(np.linalg.norm(vec))
    if abs(nrm - 1.0) > tol:
        raise ConfigError(f"{what} must be unit-norm, got ||.|| = {nrm!r}")
    return vec


def check_finite(value, what="value") -> float:
    value = float(value)
    if not np.isfinite(value):
        raise ConfigError(f"{what} must be finite, got {value}")
    return value


def check_positive(value, what="value") -> float:
    value = check_finite(value, what)
    if value <= 0:
        raise ConfigError(f"{what} must be > 0, got {value}")
    return value


def broadcast_per_mode(value, n_modes, what="parameter") -> tuple[float, ...]:
    """Expand a scalar to one value per mode, or validate a per-mode list."""
    if isinstance(value, numbers.Real):
        return (float(value),) * n_modes
    out = tuple(float(v) for v in value)
    if len(out) != n_modes:
        raise ConfigError(f"{what} must have one entry per mode ({n_modes}), got {len(out)}")
    return out
