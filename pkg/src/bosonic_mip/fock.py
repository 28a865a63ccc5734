"""Truncated bosonic mode operators and symbolic operator polynomials.

Single-mode primitives are the number operator N, and the quadratures
X = sqrt(hbar/2)(a + a^dag) and P = i sqrt(hbar/2)(a^dag - a).  Multi-mode
operators are Kronecker embeddings with the first mode as the most
significant index, so basis state |n1,...,nN> sits at the flat index
given by numpy's ravel_multi_index over the per-mode dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .errors import ConfigError, UnsupportedMonomialError
from .validation import check_dims, check_dimension, check_hbar, check_mode_index

N, X, P = "N", "X", "P"
PRIMITIVES = (N, X, P)

HERMITICITY_TOL = 1e-12

#: monomial = tuple of (mode, primitive, power), sorted by mode, one entry per mode
Monomial = tuple


@dataclass(frozen=True)
class ModeSpace:
    """Joint truncated Fock space of a register of modes."""

    dims: tuple
    hbar: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "dims", check_dims(self.dims))
        object.__setattr__(self, "hbar", check_hbar(self.hbar))

    @property
    def n_modes(self) -> int:
        return len(self.dims)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def index_of(self, occupation) -> int:
        """Flat index of the basis state |n1,...,nN>."""
        return int(np.ravel_multi_index(tuple(int(n) for n in occupation), self.dims))

    def occupation_of(self, index) -> tuple:
        return tuple(int(v) for v in np.unravel_index(int(index), self.dims))

    def basis_label(self, occupation) -> str:
        return "|" + ",".join(str(int(n)) for n in occupation) + "⟩"


def annihilation(d) -> np.ndarray:
    """Single-mode annihilation operator: a[m, m+1] = sqrt(m+1)."""
    d = check_dimension(d)
    a = np.zeros((d, d))
    m = np.arange(d - 1)
    a[m, m + 1] = np.sqrt(m + 1.0)
    return a


def creation(d) -> np.ndarray:
    return annihilation(d).T


def number(d) -> np.ndarray:
    d = check_dimension(d)
    return np.diag(np.arange(d, dtype=float))


def quadratures(d, hbar=1.0):
    """Position and momentum matrices with [x, p] = i*hbar off the top level."""
    hbar = check_hbar(hbar)
    a = annihilation(d)
    ad = a.T
    x = np.sqrt(hbar / 2.0) * (a + ad)
    p = 1j * np.sqrt(hbar / 2.0) * (ad - a)
    return x, p


def primitive_matrix(primitive, d, hbar=1.0) -> np.ndarray:
    if primitive == N:
        return number(d)
    if primitive == X:
        return quadratures(d, hbar)[0]
    if primitive == P:
        return quadratures(d, hbar)[1]
    raise ConfigError(f"unknown primitive {primitive!r}")


def projected_power(primitive, d, power, hbar=1.0) -> np.ndarray:
    """Matrix of the full-space operator power, truncated to d levels.

    For quadratures this differs from powering the truncated matrix: the
    top rows of (P x P)^k miss paths through the discarded levels, which
    softens the potential wall exactly where truncation bites.  Number
    operators are diagonal, so both readings coincide.
    """
    power = int(power)
    if power < 1:
        raise ConfigError(f"powers must be >= 1, got {power}")
    if primitive == N:
        return np.diag(np.arange(d, dtype=float) ** power)
    wide = primitive_matrix(primitive, d + power + 2, hbar)
    return np.linalg.matrix_power(wide, power)[:d, :d]


def _merge_factor(entries: dict, mode, primitive, power):
    if primitive not in PRIMITIVES:
        raise ConfigError(f"unknown primitive {primitive!r}")
    power = int(power)
    if power < 1:
        raise ConfigError(f"monomial powers must be >= 1, got {power}")
    if mode in entries:
        prim0, pow0 = entries[mode]
        if prim0 != primitive:
            raise UnsupportedMonomialError(
                f"mode {mode} carries both {prim0} and {primitive} in one monomial"
            )
        entries[mode] = (prim0, pow0 + power)
    else:
        entries[mode] = (primitive, power)


def _canon(factors) -> Monomial:
    """Canonicalize factors [(mode, primitive, power), ...] into a monomial."""
    entries: dict = {}
    for mode, primitive, power in factors:
        _merge_factor(entries, int(mode), primitive, power)
    return tuple((m, entries[m][0], entries[m][1]) for m in sorted(entries))


class OperatorPoly:
    """Real-coefficient polynomial in per-mode {N, X, P} primitives.

    Immutable value type.  Within one monomial a mode may appear with a
    single primitive only; products that would mix primitives on one mode
    raise UnsupportedMonomialError.  The scalar part is kept as the empty
    monomial.
    """

    __slots__ = ("_terms", "_key")

    def __init__(self, terms=None):
        canon: dict = {}
        if terms:
            items = terms.items() if isinstance(terms, dict) else terms
            for monomial, coeff in items:
                coeff = float(coeff)
                if not np.isfinite(coeff):
                    raise ConfigError("operator coefficients must be finite reals")
                mono = _canon(monomial)
                canon[mono] = canon.get(mono, 0.0) + coeff
        self._terms = {m: c for m, c in canon.items() if c != 0.0}
        self._key = tuple(sorted(self._terms.items()))

    # -- constructors ------------------------------------------------------
    @staticmethod
    def constant(value) -> "OperatorPoly":
        return OperatorPoly({(): float(value)})

    @staticmethod
    def primitive(primitive, mode, power=1, coeff=1.0) -> "OperatorPoly":
        return OperatorPoly({((mode, primitive, power),): coeff})

    # -- views -------------------------------------------------------------
    def terms(self):
        """Canonically ordered (monomial, coefficient) pairs."""
        return self._key

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def constant_part(self) -> float:
        return self._terms.get((), 0.0)

    def modes_used(self) -> tuple:
        modes = {m for mono in self._terms for (m, _, _) in mono}
        return tuple(sorted(modes))

    def primitives_used(self) -> tuple:
        prims = {p for mono in self._terms for (_, p, _) in mono}
        return tuple(sorted(prims))

    def is_diagonal(self) -> bool:
        """True when every non-constant factor is a number operator."""
        return all(p == N for mono in self._terms for (_, p, _) in mono)

    def split_constant(self):
        """Return (poly without scalar part, scalar part)."""
        rest = {m: c for m, c in self._terms.items() if m != ()}
        return OperatorPoly(rest), self.constant_part

    def map_modes(self, mapping) -> "OperatorPoly":
        """Relabel modes through ``mapping`` (dict or callable)."""
        remap = mapping if callable(mapping) else mapping.__getitem__
        out = {}
        for mono, coeff in self._terms.items():
            new = tuple((remap(m), p, k) for (m, p, k) in mono)
            out[_canon(new)] = out.get(_canon(new), 0.0) + coeff
        return OperatorPoly(out)

    # -- algebra -----------------------------------------------------------
    def __add__(self, other):
        other = _as_poly(other)
        out = dict(self._terms)
        for mono, coeff in other._terms.items():
            out[mono] = out.get(mono, 0.0) + coeff
        return OperatorPoly(out)

    def __radd__(self, other):
        return self.__add__(other)

    def __sub__(self, other):
        return self + (-1.0) * _as_poly(other)

    def __rsub__(self, other):
        return _as_poly(other) + (-1.0) * self

    def __neg__(self):
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return OperatorPoly({m: other * c for m, c in self._terms.items()})
        other = _as_poly(other)
        out: dict = {}
        for m1, c1 in self._terms.items():
            for m2, c2 in other._terms.items():
                mono = _canon(m1 + m2)
                out[mono] = out.get(mono, 0.0) + c1 * c2
        return OperatorPoly(out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, exponent):
        exponent = int(exponent)
        if exponent < 0:
            raise ConfigError("negative operator powers are not supported")
        out = OperatorPoly.constant(1.0)
        for _ in range(exponent):
            out = out * self
        return out

    def __eq__(self, other):
        return isinstance(other, OperatorPoly) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        if self.is_zero:
            return "OperatorPoly(0)"
        bits = []
        for mono, coeff in self._key:
            factors = "*".join(
                f"{p}{m}" + (f"^{k}" if k > 1 else "") for (m, p, k) in mono
            )
            bits.append(f"{coeff:+g}" + (f"*{factors}" if factors else ""))
        return "OperatorPoly(" + " ".join(bits) + ")"


def _as_poly(value) -> OperatorPoly:
    if isinstance(value, OperatorPoly):
        return value
    if isinstance(value, (int, float)):
        return OperatorPoly.constant(value)
    raise TypeError(f"cannot interpret {value!r} as OperatorPoly")


def n_op(mode, power=1):
    return OperatorPoly.primitive(N, mode, power)


def x_op(mode, power=1):
    return OperatorPoly.primitive(X, mode, power)


def p_op(mode, power=1):
    return OperatorPoly.primitive(P, mode, power)


def embed(matrix, mode, space: ModeSpace):
    """Act with ``matrix`` on one mode and the identity on all others."""
    mode = check_mode_index(mode, space.n_modes)
    matrix = sparse.csr_matrix(matrix)
    d = space.dims[mode]
    if matrix.shape != (d, d):
        raise ConfigError(
            f"matrix of shape {matrix.shape} does not fit mode {mode} with dimension {d}"
        )
    left = int(np.prod(space.dims[:mode], initial=1))
    right = int(np.prod(space.dims[mode + 1:], initial=1))
    out = matrix
    if left > 1:
        out = sparse.kron(sparse.identity(left, format="csr"), out, format="csr")
    if right > 1:
        out = sparse.kron(out, sparse.identity(right, format="csr"), format="csr")
    return out.tocsr()


def _occupation_grid(space: ModeSpace, mode) -> np.ndarray:
    """Flat array of the occupation number of ``mode`` over the joint basis."""
    grid = np.arange(space.dims[mode])
    shape = [1] * space.n_modes
    shape[mode] = space.dims[mode]
    return np.broadcast_to(grid.reshape(shape), space.dims).reshape(-1).astype(float)


def assemble_diagonal(poly: OperatorPoly, space: ModeSpace) -> np.ndarray:
    """Diagonal of an N-only polynomial, evaluated over the joint basis."""
    if not poly.is_diagonal():
        raise ConfigError("assemble_diagonal requires an N-only polynomial")
    diag = np.zeros(space.total_dim)
    for mono, coeff in poly.terms():
        term = np.full(space.total_dim, coeff)
        for mode, _, power in mono:
            check_mode_index(mode, space.n_modes)
            term = term * _occupation_grid(space, mode) ** power
        diag += term
    return diag


_ASSEMBLE_CACHE: dict = {}
_ASSEMBLE_CACHE_MAX = 64


def assemble(poly: OperatorPoly, space: ModeSpace):
    """Compile an operator polynomial to a sparse Hermitian CSR matrix.

    Per-mode powers are realized as projected full-space powers (see
    ``projected_power``), so the assembled matrix is the truncation of the
    infinite-dimensional operator rather than a power of truncations.
    """
    key = (poly.terms(), space.dims, space.hbar)
    cached = _ASSEMBLE_CACHE.get(key)
    if cached is not None:
        return cached

    if poly.is_diagonal():
        out = sparse.diags(assemble_diagonal(poly, space), format="csr", dtype=complex)
    else:
        dim = space.total_dim
        out = sparse.csr_matrix((dim, dim), dtype=complex)
        for mono, coeff in poly.terms():
            term = coeff * sparse.identity(dim, format="csr", dtype=complex)
            for mode, primitive, power in mono:
                mat = projected_power(primitive, space.dims[mode], power, space.hbar)
                term = term @ embed(mat, mode, space)
            out = out + term
        out = out.tocsr()
    out.eliminate_zeros()
    out.sort_indices()

    if len(_ASSEMBLE_CACHE) >= _ASSEMBLE_CACHE_MAX:
        _ASSEMBLE_CACHE.pop(next(iter(_ASSEMBLE_CACHE)))
    _ASSEMBLE_CACHE[key] = out
    return out


def hermiticity_defect(matrix) -> float:
    """max |H - H^dag| over all entries."""
    delta = matrix - matrix.conj().T
    if sparse.issparse(delta):
        return float(np.abs(delta.data).max()) if delta.nnz else 0.0
    return float(np.abs(delta).max())
