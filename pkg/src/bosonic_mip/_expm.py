"""Engines for applying matrix exponentials exp(scale*H) to state vectors.

All engines assume Hermitian H and purely imaginary ``scale`` (unitary
propagation).  The Lanczos engine is restarted adaptively: when the
Krylov residual estimate does not reach tolerance at the subspace cap,
the step is split in half recursively.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as la
import scipy.sparse as sparse

from .errors import PropagatorError

KRYLOV_TOL = 1e-10
KRYLOV_CAP = 30
_MAX_SPLIT_DEPTH = 24


class DiagonalExpm:
    """Elementwise phases for a diagonal Hamiltonian."""

    def __init__(self, diag):
        self.diag = np.asarray(diag)

    def apply(self, v, scale):
        return np.exp(scale * self.diag) * v


class DenseExpm:
    """One-time eigendecomposition; each apply is two dense matvecs."""

    def __init__(self, matrix):
        if sparse.issparse(matrix):
            matrix = matrix.toarray()
        self._eigvals, self._eigvecs = np.linalg.eigh(matrix)

    def apply(self, v, scale):
        return self._eigvecs @ (np.exp(scale * self._eigvals) * (self._eigvecs.conj().T @ v))


class KronSumExpm:
    """Exponential of a sum of single-mode terms, factorized mode by mode.

    exp(scale * sum_i h_i) equals the tensor product of the per-mode
    exponentials exactly, because terms on distinct modes commute.
    """

    def __init__(self, mode_matrices, dims, constant=0.0):
        self.dims = tuple(dims)
        self.constant = float(constant)
        self._eigs = []
        for mode, d in enumerate(self.dims):
            h = mode_matrices.get(mode)
            if h is None:
                self._eigs.append(None)
            else:
                self._eigs.append(np.linalg.eigh(h))

    def apply(self, v, scale):
        psi = v.reshape(self.dims)
        for axis, eig in enumerate(self._eigs):
            if eig is None:
                continue
            w, u = eig
            gate = (u * np.exp(scale * w)) @ u.conj().T
            psi = np.moveaxis(np.tensordot(gate, psi, axes=(1, axis)), 0, axis)
        out = psi.reshape(-1)
        if self.constant:
            out = np.exp(scale * self.constant) * out
        return out


def lanczos_expm_apply(matvec, v, scale, tol=KRYLOV_TOL, cap=KRYLOV_CAP, _depth=0):
    """exp(scale*H) @ v via a Lanczos subspace with full reorthogonalization.

    ``matvec`` applies the Hermitian H.  Convergence is judged by the
    weight that would spill into the next Krylov vector; on failure at the
    subspace cap the step is halved (adaptive restart).
    """
    beta0 = np.linalg.norm(v)
    if beta0 == 0.0:
        return v.copy()
    dim = v.shape[0]
    cap = min(cap, dim)
    basis = np.empty((cap + 1, dim), dtype=complex)
    basis[0] = v / beta0
    alphas = np.empty(cap)
    betas = np.empty(cap)
    for j in range(cap):
        w = matvec(basis[j])
        # two-pass Gram-Schmidt against the whole basis keeps the recursion
        # orthonormal, which keeps the propagation unitary to roundoff
        h1 = basis[: j + 1].conj() @ w
        w = w - basis[: j + 1].T @ h1
        h2 = basis[: j + 1].conj() @ w
        w = w - basis[: j + 1].T @ h2
        alphas[j] = (h1[j] + h2[j]).real
        b = float(np.linalg.norm(w))
        betas[j] = b
        happy = b < 1e-14
        if j >= 1 or happy:
            try:
                ew, ev = la.eigh_tridiagonal(alphas[: j + 1], betas[:j])
            except la.LinAlgError as exc:  # pragma: no cover
                raise PropagatorError(f"tridiagonal eigensolve failed: {exc}")
            col = ev @ (np.exp(scale * ew) * ev[0, :])
            err = abs(b * col[j] * abs(scale))
            if happy or err < tol:
                out = beta0 * (basis[: j + 1].T @ col)
                if not np.all(np.isfinite(out.view(float))):
                    raise PropagatorError("non-finite amplitudes during propagation")
                return out
        basis[j + 1] = w / b
    if _depth >= _MAX_SPLIT_DEPTH:
        raise PropagatorError(
            f"Krylov subspace did not converge at cap {cap} after "
            f"{_MAX_SPLIT_DEPTH} step halvings"
        )
    half = scale / 2.0
    mid = lanczos_expm_apply(matvec, v, half, tol, cap, _depth + 1)
    return lanczos_expm_apply(matvec, mid, half, tol, cap, _depth + 1)


class LanczosExpm:
    """Lanczos engine bound to a fixed sparse matrix."""

    def __init__(self, matrix):
        self._matrix = matrix.tocsr() if sparse.issparse(matrix) else np.asarray(matrix)

    def apply(self, v, scale):
        return lanczos_expm_apply(self._matrix.__matmul__, v, scale)
