"""Truncated weak Markov processes.

A process is stored in a fixed coordinate layout on the truncated space

    H_N = h  (+)  E_()  (+)  E_(1) (+) ... (+) E_(d)  (+) ...   (|alpha| <= N-1)

where every ``E_alpha`` is a copy of the wandering subspace ``E``.  Level 0
is ``h``; level ``n >= 1`` collects the copies indexed by words of length
``n - 1``.  Each ``V_k`` maps ``h`` into levels 0 and 1 (the *top map*) and
moves ``E_alpha`` identically onto ``E_(k alpha)``; on the top level it is
set to zero.  ``V_k`` is therefore a row isometry on levels ``<= N - 1``
(the valid domain), and ``V_k^*`` is exact on all of ``H_N``.

The ``V_k`` are kept as ``scipy.sparse`` CSR matrices: apart from the top
map they are permutation-like, and the truncated space grows like ``d^N``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import (ContractionError, DepthError, DimensionError, IsometryError,
                     NotUnitalError, WanderingError)
from .fmsystem import FMSystem
from .freeword import Word, count_words, enumerate_words, words_of_length
from .linalg import (RANK_TOL, Subspace, adjoint, as_cmatrix, fix_phases,
                     is_column_contraction, opnorm, orthogonal_complement,
                     orthonormal_range)

__all__ = ["TruncatedProcess", "IORepresentation", "dilate", "assemble_process",
           "kraus_theta", "random_variable", "transition", "transition_power",
           "dilation_transition", "filtration", "filtration_from_projections",
           "generated_wandering_subspace", "wold_wandering", "represent",
           "kernel_entry", "kernel_blocks", "measurement_probabilities",
           "coinvariance_conditions", "unitality_conditions", "isometry_residual",
           "wandering_decomposition_residual", "minimality_rank", "retruncate",
           "unitary_equivalence", "wandering_residual"]

STRUCT_TOL = 1e-12


def _spnorm(M):
    """Frobenius norm of a sparse or dense matrix (an upper bound for the 2-norm)."""
    if sp.issparse(M):
        return float(np.sqrt((abs(M.data) ** 2).sum())) if M.nnz else 0.0
    return float(np.linalg.norm(M)) if np.size(M) else 0.0


@dataclass(frozen=True, eq=False)
class TruncatedProcess:
    """Row isometry ``V_1..V_d`` on ``H_N`` with co-invariant ``h`` in front."""

    d: int
    N: int
    dim_h: int
    dim_E: int
    top: tuple
    V: tuple = field(repr=False)
    words: tuple = field(repr=False)

    @property
    def dim(self):
        return self.dim_h + self.dim_E * len(self.words)

    def level_end(self, n):
        """Coordinate index one past the end of level ``n``."""
        if n < 0:
            return 0
        n = min(n, self.N)
        return self.dim_h + self.dim_E * count_words(self.d, n - 1)

    def levels(self, n):
        """Slice of all coordinates in levels ``<= n``."""
        return slice(0, self.level_end(n))

    @cached_property
    def _word_index(self):
        return {w: i for i, w in enumerate(self.words)}

    def block(self, word):
        """Coordinate slice of the copy ``E_word``."""
        if not isinstance(word, Word):
            word = Word(tuple(word), self.d)
        i = self._word_index.get(word)
        if i is None:
            raise DepthError(f"no copy of E for {word} at depth {self.N}")
        start = self.dim_h + self.dim_E * i
        return slice(start, start + self.dim_E)

    def level_descriptors(self):
        out = [{"label": "h", "start": 0, "stop": self.dim_h}]
        for w in self.words:
            s = self.block(w)
            out.append({"label": w.to_json(), "start": s.start, "stop": s.stop})
        return out

    @cached_property
    def V_adj(self):
        return tuple(v.conj().T.tocsr() for v in self.V)

    @cached_property
    def A(self):
        """Compressions ``A_k = V_k^*|_h`` read off the dilation."""
        n = self.dim_h
        return tuple(np.asarray(va[:n, :n].todense()) for va in self.V_adj)

    def apply(self, word, M):
        """``V_alpha M = V_{a_1} ... V_{a_n} M`` for a dense block of columns."""
        out = np.asarray(M, dtype=complex)
        for k in reversed(word.letters):
            out = self.V[k - 1] @ out
        return out

    def apply_adjoint(self, word, M):
        """``V_alpha^* M = V_{a_n}^* ... V_{a_1}^* M``."""
        out = np.asarray(M, dtype=complex)
        for k in word.letters:
            out = self.V_adj[k - 1] @ out
        return out

    def embed_h(self, x):
        """Operator ``x`` on ``h``, extended by zero to ``H_N``."""
        x = as_cmatrix(x, self.dim_h, self.dim_h, name="x")
        X = np.zeros((self.dim, self.dim), dtype=complex)
        X[:self.dim_h, :self.dim_h] = x
        return X

    def h_frame(self):
        """Isometric embedding of ``h`` (dense ``dim x dim_h``)."""
        M = np.zeros((self.dim, self.dim_h), dtype=complex)
        M[:self.dim_h, :self.dim_h] = np.eye(self.dim_h)
        return M

    def low_embedding(self, M):
        """Embed vectors given in level-<=1 coordinates into ``H_N``."""
        M = np.asarray(M, dtype=complex).reshape(self.dim_h + self.dim_E, -1)
        out = np.zeros((self.dim, M.shape[1]), dtype=complex)
        out[:self.dim_h + self.dim_E] = M
        return out

    def dense_V(self):
        return [np.asarray(v.todense()) for v in self.V]

    @cached_property
    def unital_flag(self):
        """``sum_k V_k V_k^* = I`` on the interior levels."""
        m = self.level_end(max(self.N - 1, 1))
        S = sum(v[:m, :] @ v[:m, :].conj().T for v in self.V)
        S = S - sp.identity(m, dtype=complex, format="csr")
        return _spnorm(S) <= 1e-10


def assemble_process(d, N, dim_h, dim_E, top):
    """Build the sparse row isometry from the top maps ``V_k|_h``.

    ``top[k]`` is a ``(dim_h + dim_E) x dim_h`` matrix giving ``V_{k+1}`` on
    ``h`` in level-0/1 coordinates; the copies of ``E`` are shifted
    canonically.
    """
    if N < 1:
        raise DepthError(f"depth must be at least 1, got {N}")
    top = tuple(as_cmatrix(t, dim_h + dim_E, dim_h, name="top map") for t in top)
    if len(top) != d:
        raise DimensionError(f"expected {d} top maps, got {len(top)}")
    words = tuple(enumerate_words(d, N - 1))
    index = {w: i for i, w in enumerate(words)}
    dim = dim_h + dim_E * len(words)
    Vs = []
    for k in range(1, d + 1):
        T = top[k - 1]
        r, c = np.nonzero(T)
        rows, cols, vals = [r], [c], [T[r, c]]
        for w, i in index.items():
            if len(w) > N - 2:
                continue
            j = index[Word((k,) + w.letters, d)]
            src = dim_h + dim_E * i + np.arange(dim_E)
            dst = dim_h + dim_E * j + np.arange(dim_E)
            rows.append(dst)
            cols.append(src)
            vals.append(np.ones(dim_E, dtype=complex))
        V = sp.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                          shape=(dim, dim)).tocsr()
        Vs.append(V)
    return TruncatedProcess(d, N, dim_h, dim_E, top, tuple(Vs), words)


def dilate(A, N):
    """Minimal isometric dilation of the column contraction ``A``, truncated at depth ``N``.

    With the row contraction ``T = (A_1^*, ..., A_d^*)`` the wandering space
    is the range of the defect ``(I - T^*T)^{1/2}`` on ``h^d`` and
    ``V_k xi = A_k^* xi + defect(e_k (x) xi)``.
    """
    A = [as_cmatrix(a, name="A_k") for a in A]
    ok, Dm = is_column_contraction(A)
    if not ok:
        raise ContractionError("A is not a column contraction",
                               -float(np.linalg.eigvalsh(Dm)[0]))
    d, n = len(A), A[0].shape[0]
    TT = np.block([[A[i] @ adjoint(A[j]) for j in range(d)] for i in range(d)]) \
        if n else np.zeros((0, 0), dtype=complex)
    # rank is decided on the squared defect; its square root would lift
    # roundoff of size 1e-16 to spurious directions of size 1e-8
    M = np.eye(d * n) - TT
    w, U = np.linalg.eigh((M + adjoint(M)) / 2)
    if w.size and w[0] < -1e-8:
        raise ContractionError("A is not a column contraction", -float(w[0]))
    keep = w > RANK_TOL
    Q = fix_phases(U[:, keep])
    R = np.sqrt(w[keep])[:, None] * (adjoint(Q) @ (U[:, keep] @ adjoint(U[:, keep])))
    e = Q.shape[1]
    top = []
    for k in range(d):
        top.append(np.vstack([adjoint(A[k]), R[:, k * n:(k + 1) * n]]))
    return assemble_process(d, N, n, e, top)


# ---------------------------------------------------------------------------
# Kraus powers, random variables, transition operators


def _theta_once(proc, X):
    out = np.zeros_like(X)
    for V in proc.V:
        Y = V @ X
        out += (V @ Y.conj().T).conj().T
    return out


def kraus_theta(proc, X, n):
    """``theta^n(X) = sum_{|alpha|=n} V_alpha X V_alpha^*``.

    ``X`` must vanish outside levels ``<= N - n`` so the truncation does not
    clip the result.
    """
    X = as_cmatrix(X, proc.dim, proc.dim, name="X")
    if n < 0 or n > proc.N:
        raise DepthError(f"power {n} outside 0..{proc.N}")
    m = proc.level_end(proc.N - n)
    outside = np.abs(X[m:, :]).max(initial=0.0) + np.abs(X[:, m:]).max(initial=0.0)
    if outside > 1e-14 * max(1.0, np.abs(X).max(initial=0.0)):
        raise DepthError(f"X has support above level {proc.N - n}; theta^{n} would be clipped")
    for _ in range(n):
        X = _theta_once(proc, X)
    return X


def random_variable(proc, x, n):
    """``J^(n)(x) = theta^n(x p)`` for an operator ``x`` on ``h``."""
    return kraus_theta(proc, proc.embed_h(x), n)


def transition(A, x):
    """``Z(x) = sum_k A_k^* x A_k``."""
    A = [as_cmatrix(a, name="A_k") for a in A]
    x = as_cmatrix(x, name="x")
    n = A[0].shape[0]
    if x.shape != (n, n):
        raise DimensionError(f"x must be {n}x{n}, got {x.shape}")
    return sum(adjoint(a) @ x @ a for a in A)


def transition_power(A, x, n):
    for _ in range(n):
        x = transition(A, x)
    return x


def dilation_transition(proc, x, n):
    """``Z_n(x) = p J^(n)(x) p`` computed inside the dilation.

    Uses ``p theta^n(x p) p = sum_{|alpha|=n} (V_alpha^* p)^* x (V_alpha^* p)``,
    which avoids forming operators on all of ``H_N``.
    """
    x = as_cmatrix(x, proc.dim_h, proc.dim_h, name="x")
    if n < 0 or n > proc.N:
        raise DepthError(f"power {n} outside 0..{proc.N}")
    layer = [proc.h_frame()]
    for _ in range(n):
        layer = [va @ F for F in layer for va in proc.V_adj]
    nh = proc.dim_h
    out = np.zeros((nh, nh), dtype=complex)
    for F in layer:
        out += adjoint(F[:nh]) @ x @ F[:nh]
    return out


# ---------------------------------------------------------------------------
# Filtration and wandering subspaces


def filtration(proc, n):
    """``h_n = h (+) sum_{|alpha| < n} V_alpha E`` as a coordinate frame."""
    if n < 0 or n > proc.N:
        raise DepthError(f"filtration level {n} outside 0..{proc.N}")
    return Subspace.coordinates(proc.dim, range(proc.level_end(n)))


def filtration_from_projections(proc, n):
    """Range of ``sup(q_0, ..., q_n)`` with ``q_k = theta^k(p)``."""
    if n < 0 or n > proc.N:
        raise DepthError(f"filtration level {n} outside 0..{proc.N}")
    p = proc.embed_h(np.eye(proc.dim_h))
    S = np.zeros_like(p)
    q = p
    for k in range(n + 1):
        S += q
        if k < n:
            q = _theta_once(proc, q)
    return orthonormal_range(S)


def generated_wandering_subspace(proc):
    """``E = span(h, V(h (x) P)) - h`` computed from ``V`` (not from the layout)."""
    cols = np.hstack([(V[:, :proc.dim_h]).toarray() for V in proc.V]) if proc.dim_h else \
        np.zeros((proc.dim, 0), dtype=complex)
    cols[:proc.dim_h] = 0
    return orthonormal_range(cols)


def _wold_local(proc):
    """``E_*`` in level-<=1 coordinates."""
    R = np.hstack(proc.top) if proc.dim_h else np.zeros((proc.dim_h + proc.dim_E, 0))
    return orthogonal_complement(orthonormal_range(R) if R.size else
                                 Subspace.zero(proc.dim_h + proc.dim_E))


def wold_wandering(proc, local=False):
    """Wold wandering subspace ``E_* = (h (+) E) - V(h (x) P) = ker V^*``.

    Returned in full coordinates unless ``local`` is set, in which case the
    frame lives in level-0/1 coordinates of length ``dim_h + dim_E``.
    """
    W = _wold_local(proc)
    if local:
        return W
    return Subspace(proc.dim, proc.low_embedding(W.basis))


# ---------------------------------------------------------------------------
# Structural checks


def isometry_residual(proc):
    """``max_{j,k} ||V_j^* V_k - delta_jk I||`` on levels ``<= N - 1`` (Frobenius bound)."""
    m = proc.level_end(proc.N - 1)
    I = sp.identity(m, dtype=complex, format="csr")
    worst = 0.0
    for j in range(proc.d):
        for k in range(proc.d):
            M = (proc.V_adj[j] @ proc.V[k][:, :m])[:m, :]
            if j == k:
                M = M - I
            worst = max(worst, _spnorm(M))
    return worst


def coinvariance_conditions(proc, tol=1e-10):
    """The three equivalent forms of co-invariance of ``h``.

    Returns ``{name: (flag, residual)}`` for ``theta(p)p = theta(1)p``,
    ``h perp V(h^perp (x) P)`` and ``V_k^* h in h``.
    """
    n, m = proc.dim_h, proc.level_end(proc.N - 1)
    lhs = np.zeros((proc.dim, n), dtype=complex)
    rhs = np.zeros((proc.dim, n), dtype=complex)
    r2 = r3 = 0.0
    for V, Va in zip(proc.V, proc.V_adj):
        Y = Va[:, :n].toarray()
        Yp = np.zeros_like(Y)
        Yp[:n] = Y[:n]
        Y1 = np.zeros_like(Y)
        Y1[:m] = Y[:m]
        lhs += V @ Yp
        rhs += V @ Y1
        r2 = max(r2, _spnorm(V[:n, n:m]))
        r3 = max(r3, _spnorm(Va[n:, :n]))
    r1 = _spnorm(lhs - rhs)
    return {"theta_p_p": (r1 <= tol, r1), "orthogonal_complement": (r2 <= tol, r2),
            "coinvariant": (r3 <= tol, r3)}


def unitality_conditions(proc, tol=1e-10):
    """The four equivalent forms of ``Z(1) = 1`` (``p <= theta(p)`` and friends)."""
    n, m = proc.dim_h, proc.level_end(proc.N - 1)
    p = proc.h_frame()
    theta_p = np.zeros((n, n), dtype=complex)
    theta_1 = np.zeros((n, n), dtype=complex)
    for V, Va in zip(proc.V, proc.V_adj):
        Y = Va[:, :n].toarray()
        theta_p += (V @ np.vstack([Y[:n], np.zeros((proc.dim - n, n))]))[:n]
        theta_1 += (V @ np.vstack([Y[:m], np.zeros((proc.dim - m, n))]))[:n]
    r1 = opnorm(theta_p - np.eye(n))
    R = orthonormal_range(np.hstack([V[:, :n].toarray() for V in proc.V])) if n else None
    r2 = opnorm(p - R.basis @ (adjoint(R.basis) @ p)) if n else 0.0
    r3 = max(opnorm(theta_1 - np.eye(n)), coinvariance_conditions(proc, tol)["coinvariant"][1])
    r4 = opnorm(transition(proc.A, np.eye(n)) - np.eye(n)) if n else 0.0
    return {"p_le_theta_p": (r1 <= tol, r1), "h_in_range": (r2 <= tol, r2),
            "p_le_theta_1_and_coinvariant": (r3 <= tol, r3), "Z_unital": (r4 <= tol, r4)}


def wandering_decomposition_residual(proc):
    """Check ``H_N = h (+) sum_{|alpha| <= N-1} V_alpha E`` with ``E`` computed from ``V``.

    Returns ``(orthonormality residual, dimension of the decomposition,
    principal-angle distance between E and the layout copy E_())``.
    """
    E = generated_wandering_subspace(proc)
    cols = [sp.csc_matrix(proc.h_frame())]
    for w in proc.words:
        Y = proc.apply(w, E.basis)
        Y[np.abs(Y) < 1e-300] = 0
        cols.append(sp.csc_matrix(Y))
    M = sp.hstack(cols).tocsc()
    G = (M.conj().T @ M) - sp.identity(M.shape[1], dtype=complex)
    layout = Subspace.coordinates(proc.dim, range(proc.dim_h, proc.dim_h + proc.dim_E))
    from .linalg import principal_angles
    ang = principal_angles(E, layout)
    return _spnorm(G), M.shape[1], float(ang.max()) if ang.size else 0.0


def minimality_rank(proc):
    """Rank of ``span{V_alpha h : |alpha| <= N}`` (equals ``dim`` for a minimal dilation)."""
    cols = [proc.apply(w, proc.h_frame()) for w in enumerate_words(proc.d, proc.N)]
    return orthonormal_range(np.hstack(cols)).rank


# ---------------------------------------------------------------------------
# Representations of structure maps


@dataclass(frozen=True, eq=False)
class IORepresentation:
    """Input space ``U_0 = i0(U) in E`` and output space ``Y_0 = j0(Y) in h (+) E``.

    ``i0`` is given in ``E``-coordinates, ``j0`` in level-0/1 coordinates.
    """

    process: TruncatedProcess
    i0: np.ndarray
    j0: np.ndarray
    system: FMSystem

    @property
    def U0(self):
        p = self.process
        out = np.zeros((p.dim, self.i0.shape[1]), dtype=complex)
        out[p.dim_h:p.dim_h + p.dim_E] = self.i0
        return out

    @property
    def Y0(self):
        return self.process.low_embedding(self.j0)


def _check_isometry(M, name, tol=1e-10):
    r = opnorm(adjoint(M) @ M - np.eye(M.shape[1]))
    if r > tol:
        raise IsometryError(f"{name} is not an isometry", r)


def wandering_residual(proc, frame, depth=None):
    """``max |<V_alpha y, V_beta y'>| - delta`` over ``|alpha|,|beta| <= depth``."""
    depth = proc.N - 1 if depth is None else depth
    cols = []
    for w in enumerate_words(proc.d, depth):
        Y = proc.apply(w, frame)
        cols.append(sp.csc_matrix(Y))
    M = sp.hstack(cols).tocsc()
    G = (M.conj().T @ M) - sp.identity(M.shape[1], dtype=complex)
    return float(abs(G).max()) if G.nnz else 0.0


def represent(proc, i0=None, j0=None, check_wandering=True, tol=1e-9):
    """Structure maps ``(A, B, C, D)`` induced by input/output spaces of a process.

    Defaults are the maximal input space ``U_0 = E`` and the Wold output
    space ``Y_0 = E_*``.
    """
    n, e = proc.dim_h, proc.dim_E
    i0 = np.eye(e, dtype=complex) if i0 is None else as_cmatrix(i0, rows=e, name="i0")
    j0 = wold_wandering(proc, local=True).basis if j0 is None else \
        as_cmatrix(j0, rows=n + e, name="j0")
    _check_isometry(i0, "i0")
    _check_isometry(j0, "j0")
    if check_wandering and j0.shape[1]:
        r = wandering_residual(proc, proc.low_embedding(j0))
        if r > tol:
            raise WanderingError("represented output space is not wandering", r)
    U0 = np.zeros((proc.dim, i0.shape[1]), dtype=complex)
    U0[n:n + e] = i0
    A = [np.asarray(va[:n, :n].todense()) for va in proc.V_adj]
    B = [(va @ U0)[:n] for va in proc.V_adj]
    C = adjoint(j0[:n])
    D = adjoint(j0[n:]) @ i0
    return IORepresentation(proc, i0, j0, FMSystem(A, B, C, D))


def kernel_blocks(rep, depth):
    """All blocks ``P_{Y_alpha}|_{U_beta}`` for ``|alpha|, |beta| <= depth``.

    Returns ``(words, K)`` with ``K[i][j]`` the ``dim_y x dim_u`` block for
    ``(words[i], words[j])``.
    """
    proc = rep.process
    if depth > proc.N - 1:
        raise DepthError(f"kernel depth {depth} exceeds {proc.N - 1}")
    words = enumerate_words(proc.d, depth)
    Ys = sp.hstack([sp.csc_matrix(proc.apply(w, rep.Y0)) for w in words]).tocsc()
    Us = sp.hstack([sp.csc_matrix(proc.apply(w, rep.U0)) for w in words]).tocsc()
    G = (Ys.conj().T @ Us).toarray()
    ny, nu = rep.j0.shape[1], rep.i0.shape[1]
    K = [[G[i * ny:(i + 1) * ny, j * nu:(j + 1) * nu] for j in range(len(words))]
         for i in range(len(words))]
    return words, K


def kernel_entry(rep, alpha, beta):
    """``P_{Y_alpha}|_{U_beta}`` in the identified bases (``dim_y x dim_u``)."""
    proc = rep.process
    if len(alpha) > proc.N - 1 or len(beta) > proc.N - 1:
        raise DepthError(f"kernel entries need |alpha|, |beta| <= {proc.N - 1}")
    return adjoint(proc.apply(alpha, rep.Y0)) @ proc.apply(beta, rep.U0)


# ---------------------------------------------------------------------------
# Measurements


def measurement_probabilities(proc, eta, m):
    """Outcome distribution of the letter measured at time ``m`` in the state ``eta``.

    ``p(k) = sum_{|beta| = m, beta_m = k} ||V_beta^* eta||^2``.
    """
    if not proc.unital_flag:
        raise NotUnitalError("measurement probabilities need a unital process")
    if m < 1 or m > proc.N:
        raise DepthError(f"time {m} outside 1..{proc.N}")
    eta = np.asarray(eta, dtype=complex).reshape(-1)
    if eta.size != proc.dim:
        raise DimensionError(f"state has dimension {eta.size}, expected {proc.dim}")
    norm = np.linalg.norm(eta)
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"state must be a unit vector (norm {norm})")
    layer = [eta]
    for _ in range(m - 1):
        layer = [va @ v for v in layer for va in proc.V_adj]
    probs = np.zeros(proc.d)
    for v in layer:
        for k, va in enumerate(proc.V_adj):
            w = va @ v
            probs[k] += float(np.vdot(w, w).real)
    return probs


def retruncate(proc, N):
    """The same process cut at another depth (the top maps determine it)."""
    return assemble_process(proc.d, N, proc.dim_h, proc.dim_E, proc.top)


def unitary_equivalence(P1, P2):
    """Unitary ``W: H(P2) -> H(P1)`` fixing ``h`` and intertwining the row isometries.

    Both processes must dilate the same compression.  ``W`` is the identity
    on ``h`` and ``W_0 (x) 1`` on the copies of ``E``, where ``W_0`` carries
    the wandering-space part of ``P2``'s top maps onto that of ``P1``.
    Returns ``(W_0, residuals)`` with the unitarity defect of ``W_0`` and the
    worst intertwining defect ``||V1_k W - W V2_k||`` on the valid domain.
    """
    if (P1.d, P1.N, P1.dim_h) != (P2.d, P2.N, P2.dim_h):
        raise DimensionError("processes differ in multiplicity, depth or base dimension")
    n = P1.dim_h
    F1 = np.hstack([t[n:] for t in P1.top])
    F2 = np.hstack([t[n:] for t in P2.top])
    W0 = np.linalg.lstsq(F2.T, F1.T, rcond=None)[0].T
    res = {"compression": max(opnorm(t1[:n] - t2[:n]) for t1, t2 in zip(P1.top, P2.top)),
           "unitarity": float("inf") if W0.shape[0] != W0.shape[1] else
           max(opnorm(adjoint(W0) @ W0 - np.eye(W0.shape[1])),
               opnorm(W0 @ adjoint(W0) - np.eye(W0.shape[0])))}
    if np.isfinite(res["unitarity"]):
        W = sp.block_diag([sp.identity(n, dtype=complex),
                           sp.kron(sp.identity(len(P1.words)), sp.csr_matrix(W0))]).tocsr()
        m = P1.level_end(P1.N - 1)
        res["intertwining"] = max(_spnorm((V1 @ W - W @ V2)[:, :m])
                                  for V1, V2 in zip(P1.V, P2.V))
    else:
        res["intertwining"] = float("inf")
    return W0, res
