"""Noncommutative Fornasini-Marchesini systems.

A system with multiplicity ``d`` evolves along words:

    x(a k) = A_k x(a) + B_k u(a),      y(a) = C x(a) + D u(a).

This module holds the structure maps, runs the recursion, and computes
transfer-function coefficients and observability data.  Contractivity is
not enforced here; only the dilation machinery in :mod:`fmprocess.process`
requires it.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, DepthError, DimensionError, MultiplicityError
from .freeword import Word, enumerate_words
from .linalg import Subspace, adjoint, as_cmatrix, is_column_contraction, min_eig, opnorm

__all__ = ["FMSystem", "WordSignal", "evolve", "transfer_coeff", "transfer_coefficients",
           "observability_row", "observability_gramian", "is_observable",
           "transfer_gramian"]

GRAMIAN_LAYER_TOL = 1e-12
GRAMIAN_CAP = 200


@dataclass(frozen=True)
class FMSystem:
    """Structure maps ``(A, B, C, D)``; ``A`` and ``B`` are families of length ``d``."""

    A: tuple
    B: tuple
    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        A = tuple(as_cmatrix(a, name="A_k") for a in self.A)
        B = tuple(as_cmatrix(b, name="B_k") for b in self.B)
        if not A:
            raise MultiplicityError("a system needs at least one letter")
        if len(B) != len(A):
            raise MultiplicityError(f"{len(A)} A-maps but {len(B)} B-maps")
        nx = A[0].shape[0]
        for a in A:
            if a.shape != (nx, nx):
                raise DimensionError("A_k must be square of equal size")
        nu = B[0].shape[1]
        for b in B:
            if b.shape != (nx, nu):
                raise DimensionError(f"B_k must be {nx}x{nu}, got {b.shape}")
        C = as_cmatrix(self.C, cols=nx, name="C")
        D = as_cmatrix(self.D, rows=C.shape[0], cols=nu, name="D")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def d(self):
        return len(self.A)

    @property
    def dim_x(self):
        return self.A[0].shape[0]

    @property
    def dim_u(self):
        return self.B[0].shape[1]

    @property
    def dim_y(self):
        return self.C.shape[0]

    def column_contraction(self, tol=1e-9):
        """``(flag, defect)`` for the family ``A``."""
        return is_column_contraction(self.A, tol)

    def colligation(self):
        """The block map ``[[A_1 B_1], ..., [A_d B_d], [C D]]``."""
        rows = [np.hstack([a, b]) for a, b in zip(self.A, self.B)]
        rows.append(np.hstack([self.C, self.D]))
        return np.vstack(rows)

    def allclose(self, other, atol=1e-10):
        return max_difference(self, other) <= atol


def max_difference(s1, s2):
    """Largest entrywise deviation between two systems of equal shape."""
    if (s1.d, s1.dim_x, s1.dim_u, s1.dim_y) != (s2.d, s2.dim_x, s2.dim_u, s2.dim_y):
        return float("inf")
    diffs = [np.abs(a - b).max(initial=0.0) for a, b in zip(s1.A, s2.A)]
    diffs += [np.abs(a - b).max(initial=0.0) for a, b in zip(s1.B, s2.B)]
    diffs.append(np.abs(s1.C - s2.C).max(initial=0.0))
    diffs.append(np.abs(s1.D - s2.D).max(initial=0.0))
    return float(max(diffs))


@dataclass
class WordSignal:
    """Vector-valued function on all words of length ``<= N``."""

    d: int
    N: int
    dim: int
    values: dict = field(default_factory=dict)

    def __getitem__(self, word):
        if not isinstance(word, Word):
            word = Word(tuple(word), self.d)
        return self.values[word]

    def __setitem__(self, word, value):
        if not isinstance(word, Word):
            word = Word(tuple(word), self.d)
        self.values[word] = np.asarray(value, dtype=complex).reshape(self.dim)

    @classmethod
    def zeros(cls, d, N, dim):
        sig = cls(d, N, dim)
        for w in enumerate_words(d, N):
            sig.values[w] = np.zeros(dim, dtype=complex)
        return sig

    @classmethod
    def impulse(cls, d, N, vector):
        v = np.asarray(vector, dtype=complex).ravel()
        sig = cls.zeros(d, N, v.size)
        sig.values[Word.empty(d)] = v.copy()
        return sig

    @classmethod
    def from_function(cls, d, N, dim, fn):
        sig = cls(d, N, dim)
        for w in enumerate_words(d, N):
            sig[w] = fn(w)
        return sig

    def is_complete(self):
        return set(self.values) == set(enumerate_words(self.d, self.N))


def evolve(sys: FMSystem, x0, u: WordSignal, N: int):
    """Run the recursion to depth ``N``; returns ``(x, y)`` as word signals."""
    if u.d != sys.d:
        raise MultiplicityError(f"input is over {u.d} letters, system over {sys.d}")
    if u.dim != sys.dim_u:
        raise DimensionError(f"input dimension {u.dim} != {sys.dim_u}")
    if u.N < N:
        raise DepthError(f"input defined to depth {u.N} < {N}")
    x0 = np.asarray(x0, dtype=complex).ravel()
    if x0.size != sys.dim_x:
        raise DimensionError(f"initial state has dimension {x0.size}, expected {sys.dim_x}")
    words = enumerate_words(sys.d, N)
    x = WordSignal(sys.d, N, sys.dim_x)
    y = WordSignal(sys.d, N, sys.dim_y)
    x.values[words[0]] = x0
    for w in words:
        xw, uw = x.values[w], u[w]
        y.values[w] = sys.C @ xw + sys.D @ uw
        if len(w) < N:
            for k in range(1, sys.d + 1):
                x.values[Word(w.letters + (k,), sys.d)] = sys.A[k - 1] @ xw + sys.B[k - 1] @ uw
    return x, y


def transfer_coeff(sys: FMSystem, alpha: Word):
    """Coefficient ``T^alpha``: ``D``, ``C B_k`` or ``C A_{a_r} ... A_{a_2} B_{a_1}``."""
    if alpha.d != sys.d:
        raise MultiplicityError(f"word over {alpha.d} letters, system over {sys.d}")
    if len(alpha) == 0:
        return sys.D.copy()
    M = sys.B[alpha[0] - 1]
    for k in alpha.letters[1:]:
        M = sys.A[k - 1] @ M
    return sys.C @ M


def transfer_coefficients(sys: FMSystem, N: int):
    """All ``T^alpha`` for ``|alpha| <= N``, sharing prefixes."""
    out = {}
    words = enumerate_words(sys.d, N)
    state = {}
    for w in words:
        if len(w) == 0:
            out[w] = sys.D.copy()
            continue
        if len(w) == 1:
            M = sys.B[w[0] - 1]
        else:
            M = sys.A[w[-1] - 1] @ state[Word(w.letters[:-1], sys.d)]
        state[w] = M
        out[w] = sys.C @ M
    return out


def observability_row(sys: FMSystem, alpha: Word):
    """``C A^alpha`` with ``A^alpha = A_{a_n} ... A_{a_1}``."""
    if alpha.d != sys.d:
        raise MultiplicityError(f"word over {alpha.d} letters, system over {sys.d}")
    M = sys.C
    for k in reversed(alpha.letters):
        M = M @ sys.A[k - 1]
    return M.copy()


def _stein_step(A, W):
    return sum(adjoint(a) @ W @ a for a in A)


def _gramian_fixed_point(A, Q, tol, maxiter):
    n = Q.shape[0]
    L = sum(np.kron(adjoint(a), a.T) for a in A)
    M = np.eye(n * n) - L
    q = Q.reshape(-1)
    try:
        w = np.linalg.solve(M, q)
    except np.linalg.LinAlgError:
        w = np.linalg.lstsq(M, q, rcond=None)[0]
    W = w.reshape(n, n)
    for _ in range(maxiter):
        res = Q + _stein_step(A, W) - W
        r = opnorm(res)
        if r <= tol:
            return (W + adjoint(W)) / 2
        W = W + np.linalg.lstsq(M, res.reshape(-1), rcond=None)[0].reshape(n, n)
    res = opnorm(Q + _stein_step(A, W) - W)
    if res <= tol:
        return (W + adjoint(W)) / 2
    raise ConvergenceError("fixed-point Gramian did not converge", res)


def observability_gramian(sys: FMSystem, mode="truncated", depth=None, tol=1e-12,
                          maxiter=200):
    """Observability Gramian ``sum_alpha (C A^alpha)^* (C A^alpha)``.

    ``mode="truncated"`` sums words up to ``depth`` through the recursion
    ``W_N = C^*C + sum_k A_k^* W_{N-1} A_k``; with ``depth=None`` it stops once
    a layer adds less than ``1e-12`` in norm, or warns at depth 200.
    ``mode="fixed_point"`` solves ``W = C^*C + sum_k A_k^* W A_k`` directly and
    requires a strictly contractive ``A``.
    """
    Q = adjoint(sys.C) @ sys.C
    if mode == "fixed_point":
        return _gramian_fixed_point(sys.A, Q, tol, maxiter)
    if mode != "truncated":
        raise ValueError(f"unknown Gramian mode {mode!r}")
    W = Q.copy()
    if depth is not None:
        for _ in range(depth):
            W = Q + _stein_step(sys.A, W)
        return W
    for n in range(1, GRAMIAN_CAP + 1):
        W_next = Q + _stein_step(sys.A, W)
        layer = opnorm(W_next - W)
        W = W_next
        if layer < GRAMIAN_LAYER_TOL:
            return W
    warnings.warn(f"observability Gramian not converged at depth {GRAMIAN_CAP} "
                  f"(last layer {layer:.2e})", RuntimeWarning, stacklevel=2)
    return W


def transfer_gramian(sys: FMSystem, depth: int):
    """Partial sums ``sum_{|s|<=n} (T^s)^* T^s`` for ``n = 0..depth``."""
    sums = [adjoint(sys.D) @ sys.D]
    Q = adjoint(sys.C) @ sys.C
    W = np.zeros_like(Q)
    for n in range(1, depth + 1):
        W = Q + _stein_step(sys.A, W) if n > 1 else Q.copy()
        sums.append(sums[0] + sum(adjoint(b) @ W @ b for b in sys.B))
    return sums


def is_observable(sys: FMSystem, subspace=None, tol=1e-9, mode="truncated", depth=None):
    """Observability of a subspace: the compressed Gramian is positive definite.

    For the zero subspace this is vacuously true.  A truncated Gramian of
    depth at least ``dim_x`` already has the kernel of the full one.
    """
    if subspace is None:
        subspace = Subspace.full(sys.dim_x)
    if subspace.ambient_dim != sys.dim_x:
        raise DimensionError("subspace must live in the state space")
    if subspace.rank == 0:
        return True
    if mode == "truncated" and depth is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            W = observability_gramian(sys)
    else:
        W = observability_gramian(sys, mode=mode, depth=depth)
    Wc = adjoint(subspace.basis) @ W @ subspace.basis
    return min_eig(Wc) > tol
