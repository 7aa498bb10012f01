"""Dense complex linear algebra used throughout the package.

Every matrix is a 2-d complex ``numpy`` array.  Subspaces are carried as
orthonormal frames (:class:`Subspace`); numerical rank decisions use a
single relative threshold, :data:`RANK_TOL`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DimensionError, InputError, NotPSDError

__all__ = ["RANK_TOL", "Subspace", "as_cmatrix", "adjoint", "psd_sqrt",
           "orthonormal_range", "orthogonal_complement", "is_column_contraction",
           "principal_angles", "same_span", "fix_phases", "opnorm", "min_eig",
           "loewner_geq", "defect"]

RANK_TOL = 1e-10
HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-8


def as_cmatrix(M, rows=None, cols=None, name="matrix"):
    """Coerce to a finite 2-d complex array, optionally checking its shape."""
    A = np.array(M, dtype=complex)
    if A.ndim == 1 and rows is not None and cols == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2:
        if A.size == 0 and rows is not None and cols is not None:
            A = A.reshape(rows, cols)
        else:
            raise DimensionError(f"{name} must be 2-dimensional, got shape {A.shape}")
    if rows is not None and A.shape[0] != rows:
        raise DimensionError(f"{name} has {A.shape[0]} rows, expected {rows}")
    if cols is not None and A.shape[1] != cols:
        raise DimensionError(f"{name} has {A.shape[1]} columns, expected {cols}")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} has non-finite entries")
    return A


def adjoint(M):
    return np.conj(np.transpose(M))


def opnorm(M):
    """Spectral norm; 0 for empty matrices."""
    M = np.asarray(M)
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def _hermitian_part(M, name):
    M = as_cmatrix(M, name=name)
    if M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square")
    scale = max(1.0, opnorm(M))
    if opnorm(M - adjoint(M)) > HERMITIAN_TOL * scale:
        raise NotPSDError(f"{name} is not Hermitian", opnorm(M - adjoint(M)))
    return (M + adjoint(M)) / 2


def min_eig(M):
    """Smallest eigenvalue of a Hermitian matrix (``inf`` when empty)."""
    M = np.asarray(M)
    if M.size == 0:
        return float("inf")
    return float(np.linalg.eigvalsh((M + adjoint(M)) / 2)[0])


def loewner_geq(X, Y, tol):
    """``X >= Y - tol`` in operator order."""
    return min_eig(np.asarray(X) - np.asarray(Y)) >= -tol


def psd_sqrt(M):
    """Positive square root via the Hermitian eigendecomposition.

    Eigenvalues in ``[-1e-8, 0)`` are treated as rounding noise and clamped;
    anything more negative raises :class:`NotPSDError`.
    """
    H = _hermitian_part(M, "matrix")
    if H.size == 0:
        return H
    w, U = np.linalg.eigh(H)
    if w[0] < -PSD_TOL:
        raise NotPSDError("matrix is not positive semidefinite", -w[0])
    w = np.clip(w, 0.0, None)
    S = (U * np.sqrt(w)) @ adjoint(U)
    return (S + adjoint(S)) / 2


def defect(T):
    """Defect operator ``sqrt(1 - T* T)`` of a contraction."""
    T = as_cmatrix(T, name="contraction")
    return psd_sqrt(np.eye(T.shape[1]) - adjoint(T) @ T)


def fix_phases(Q):
    """Rotate each column so its first non-negligible entry is real positive."""
    Q = np.array(Q, dtype=complex)
    for j in range(Q.shape[1]):
        col = Q[:, j]
        mags = np.abs(col)
        if mags.size == 0 or mags.max() == 0:
            continue
        i = int(np.argmax(mags > 1e-8 * mags.max()))
        Q[:, j] = col * (np.conj(col[i]) / mags[i])
    return Q


@dataclass(frozen=True)
class Subspace:
    """An orthonormal frame: the columns of ``basis`` span the subspace."""

    ambient_dim: int
    basis: np.ndarray

    def __post_init__(self):
        B = np.asarray(self.basis, dtype=complex).reshape(self.ambient_dim, -1)
        object.__setattr__(self, "basis", B)

    @property
    def rank(self):
        return self.basis.shape[1]

    @property
    def projector(self):
        return self.basis @ adjoint(self.basis)

    @classmethod
    def zero(cls, ambient_dim):
        return cls(ambient_dim, np.zeros((ambient_dim, 0), dtype=complex))

    @classmethod
    def full(cls, ambient_dim):
        return cls(ambient_dim, np.eye(ambient_dim, dtype=complex))

    @classmethod
    def coordinates(cls, ambient_dim, indices):
        """Span of selected standard basis vectors."""
        B = np.zeros((ambient_dim, len(indices)), dtype=complex)
        for j, i in enumerate(indices):
            B[i, j] = 1.0
        return cls(ambient_dim, B)

    def orthonormality_defect(self):
        return opnorm(adjoint(self.basis) @ self.basis - np.eye(self.rank))

    def complement(self):
        return orthogonal_complement(self)

    def contains(self, vectors, tol=1e-9):
        V = np.asarray(vectors, dtype=complex).reshape(self.ambient_dim, -1)
        return opnorm(V - self.projector @ V) <= tol * max(1.0, opnorm(V))


def orthonormal_range(M, tol=RANK_TOL):
    """Orthonormal basis for the numerical range of ``M``.

    Singular values at or below ``tol`` times the largest one are discarded.
    Column phases are normalized with :func:`fix_phases`.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.asarray(M, dtype=complex)
    if M.ndim == 1:
        M = M.reshape(-1, 1)
    n = M.shape[0]
    if M.size == 0:
        return Subspace.zero(n)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return Subspace.zero(n)
    r = int(np.sum(s > tol * s[0]))
    return Subspace(n, fix_phases(U[:, :r]))


def orthogonal_complement(W, tol=RANK_TOL):
    """Orthonormal frame for the complement of a subspace (or of a range)."""
    if not isinstance(W, Subspace):
        W = orthonormal_range(W, tol)
    n = W.ambient_dim
    if W.rank == 0:
        return Subspace.full(n)
    if W.rank >= n:
        return Subspace.zero(n)
    N = scipy.linalg.null_space(adjoint(W.basis), rcond=tol)
    return Subspace(n, fix_phases(N))


def principal_angles(W1, W2):
    """Principal angles (radians) between two subspaces of equal rank."""
    B1 = W1.basis if isinstance(W1, Subspace) else np.asarray(W1)
    B2 = W2.basis if isinstance(W2, Subspace) else np.asarray(W2)
    if B1.shape[1] == 0 and B2.shape[1] == 0:
        return np.zeros(0)
    if B1.shape[1] == 0 or B2.shape[1] == 0:
        return np.full(max(B1.shape[1], B2.shape[1]), np.pi / 2)
    return scipy.linalg.subspace_angles(B1, B2)


def same_span(W1, W2, tol=1e-8):
    r1 = W1.rank if isinstance(W1, Subspace) else np.asarray(W1).shape[1]
    r2 = W2.rank if isinstance(W2, Subspace) else np.asarray(W2).shape[1]
    if r1 != r2:
        return False
    ang = principal_angles(W1, W2)
    return bool(ang.size == 0 or ang.max() < tol)


def is_column_contraction(family, tol=1e-9):
    """Test ``I - sum_k A_k^* A_k >= -tol``; returns ``(flag, defect_matrix)``."""
    ops = [as_cmatrix(A, name="A_k") for A in family]
    if not ops:
        raise DimensionError("empty operator family")
    n = ops[0].shape[0]
    for A in ops:
        if A.shape != (n, n):
            raise DimensionError("column contraction entries must be square and equal size")
    Dm = np.eye(n, dtype=complex) - sum(adjoint(A) @ A for A in ops)
    Dm = (Dm + adjoint(Dm)) / 2
    return min_eig(Dm) >= -tol, Dm
