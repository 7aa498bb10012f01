"""Cascades of processes and of systems.

Two processes ``G`` (on ``g``) and ``K`` (on ``k``) are glued along a
contraction ``gamma`` from the Wold wandering space ``E^k_*`` of ``K`` to
the wandering space ``E^g`` of ``G``.  In the assembled process the base
space is ordered ``h = k (+) g`` and every copy of the wandering space is
``E^k (+) D``, with ``D`` the defect space of ``gamma^*``.  A vector
``w`` of ``E^g`` sits inside ``H`` as ``iota w = (gamma^* w, D_{gamma^*} w)``.

Besides the assembly, the module classifies extensions (a process with a
co-invariant subspace determines its ``gamma``), checks morphisms, and
computes the block formulas for cascades of systems.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import (CoinvarianceError, ContractionError, DimensionError, MultiplicityError,
                     SupportError, ValidationError)
from .fmsystem import FMSystem, transfer_coefficients
from .freeword import Word, enumerate_words, factorizations
from .linalg import (Subspace, adjoint, as_cmatrix, opnorm, orthogonal_complement,
                     orthonormal_range, psd_sqrt)
from .process import (TruncatedProcess, assemble_process, dilate, represent, retruncate,
                      unitary_equivalence, wold_wandering)

__all__ = ["Morphism", "GammaCascade", "verify_morphism", "subprocess_from_coinvariant",
           "quotient_process", "build_cascade", "recover_gamma", "extension_gamma",
           "cascade_structure_maps", "represented_cascade", "iterate_cascade",
           "defect_unitary", "cascade_geometry", "factorized_transfer",
           "cascade_transfer_residual", "ASSEMBLY_TOL", "MATCH_TOL"]

ASSEMBLY_TOL = 1e-11
MATCH_TOL = 1e-9
NORM_TOL = 1e-10


def _frame(sub, ambient, name):
    if isinstance(sub, Subspace):
        if sub.ambient_dim != ambient:
            raise DimensionError(f"{name} lives in dimension {sub.ambient_dim}, expected {ambient}")
        B = sub.basis
    else:
        B = as_cmatrix(sub, rows=ambient, name=name)
    if B.shape[1] and opnorm(adjoint(B) @ B - np.eye(B.shape[1])) > 1e-10:
        B = orthonormal_range(B).basis
    return B


# ---------------------------------------------------------------------------
# Morphisms, subprocesses and quotients


@dataclass(frozen=True, eq=False)
class Morphism:
    """Contraction ``t`` between base spaces intertwining the compressions."""

    source: TruncatedProcess
    target: TruncatedProcess
    t: np.ndarray


def verify_morphism(m: Morphism, tol=1e-10):
    """Check ``||t|| <= 1`` and ``A^target_k t = t A^source_k``.

    Returns ``(ok, residuals)``.
    """
    t = as_cmatrix(m.t, rows=m.target.dim_h, cols=m.source.dim_h, name="t")
    if m.source.d != m.target.d:
        raise MultiplicityError("morphisms need a common multiplicity")
    norm_excess = max(0.0, opnorm(t) - 1.0)
    inter = max((opnorm(At @ t - t @ As) for At, As in zip(m.target.A, m.source.A)),
                default=0.0)
    return norm_excess <= tol and inter <= tol, {"norm_excess": norm_excess,
                                                  "intertwining": inter}


def _check_coinvariant(A, Qg, tol):
    r = max((opnorm(a @ Qg - Qg @ (adjoint(Qg) @ a @ Qg)) for a in A), default=0.0)
    if r > tol:
        raise CoinvarianceError("subspace is not co-invariant", r)
    return r


def subprocess_from_coinvariant(H: TruncatedProcess, g, tol=1e-10):
    """Process dilated from ``A_k|_g`` for a co-invariant ``g``.

    Returns ``(G, morphism)``; the morphism is the inclusion of ``g``.
    """
    Qg = _frame(g, H.dim_h, "g")
    _check_coinvariant(H.A, Qg, tol)
    G = dilate([adjoint(Qg) @ a @ Qg for a in H.A], H.N) if Qg.shape[1] else \
        dilate([np.zeros((0, 0))] * H.d, H.N)
    m = Morphism(G, H, Qg)
    ok, res = verify_morphism(m, tol=max(tol, 1e-10))
    if not ok:
        raise ValidationError("inclusion of the subprocess is not a morphism",
                              res["intertwining"])
    return G, m


def quotient_process(H: TruncatedProcess, g, tol=1e-10):
    """Process on ``k = h - g`` dilated from ``P_k A_k|_k``.

    Returns ``(K, morphism)`` with the coisometric morphism ``P_k``.
    """
    Qg = _frame(g, H.dim_h, "g")
    _check_coinvariant(H.A, Qg, tol)
    Qk = orthogonal_complement(Subspace(H.dim_h, Qg)).basis
    K = dilate([adjoint(Qk) @ a @ Qk for a in H.A], H.N) if Qk.shape[1] else \
        dilate([np.zeros((0, 0))] * H.d, H.N)
    m = Morphism(H, K, adjoint(Qk))
    ok, res = verify_morphism(m, tol=max(tol, 1e-10))
    if not ok:
        raise ValidationError("projection onto the quotient is not a morphism",
                              res["intertwining"])
    return K, m


# ---------------------------------------------------------------------------
# Assembly


@dataclass(frozen=True, eq=False)
class GammaCascade:
    """Assembled ``gamma``-cascade together with its bookkeeping.

    ``S`` is the orthonormal frame of ``E^k_*`` in ``K``'s level-0/1
    coordinates; ``gamma`` maps ``S``-coordinates to ``E^g``-coordinates.
    ``iota`` is the isometry ``E^g -> h (+) E`` of ``H`` (level-0/1
    coordinates).  ``H`` is the piecewise assembly; ``H_redilated`` the
    dilation of its compression, matched to ``H`` by ``W0``.
    """

    G: TruncatedProcess
    K: TruncatedProcess
    gamma: np.ndarray
    H: TruncatedProcess
    S: np.ndarray
    iota: np.ndarray
    defect_dim: int
    H_redilated: TruncatedProcess = field(repr=False)
    W0: np.ndarray = field(repr=False)
    residuals: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.H.N

    @property
    def d(self):
        return self.H.d

    @property
    def dim_g(self):
        return self.G.dim_h

    @property
    def dim_k(self):
        return self.K.dim_h

    def g_frame(self):
        """``g`` inside ``h`` (``dim_h x dim_g``)."""
        M = np.zeros((self.H.dim_h, self.dim_g), dtype=complex)
        M[self.dim_k:] = np.eye(self.dim_g)
        return M

    def k_frame(self):
        M = np.zeros((self.H.dim_h, self.dim_k), dtype=complex)
        M[:self.dim_k] = np.eye(self.dim_k)
        return M

    def K_embedding(self):
        """Sparse isometry from ``K``'s coordinates into ``H``'s."""
        H, K = self.H, self.K
        rows = list(range(self.dim_k))
        for i in range(len(K.words)):
            start = H.dim_h + H.dim_E * i
            rows.extend(range(start, start + K.dim_E))
        return sp.csr_matrix((np.ones(len(rows), dtype=complex), (rows, range(len(rows)))),
                             shape=(H.dim, K.dim))

    def G_embedding(self):
        """Dense isometry from ``G``'s coordinates into ``H``'s.

        ``g`` goes to ``g``; the copy ``E^g_alpha`` goes to ``V_alpha iota E^g``.
        """
        H, G = self.H, self.G
        out = np.zeros((H.dim, G.dim), dtype=complex)
        out[:H.dim_h, :G.dim_h] = self.g_frame()
        base = H.low_embedding(self.iota)
        for w in G.words:
            out[:, G.block(w)] = H.apply(w, base)
        return out

    def wold_k_in_H(self):
        """``E^k_*`` in ``H``'s level-0/1 coordinates."""
        H = self.H
        J = np.zeros((H.dim_h + H.dim_E, self.S.shape[1]), dtype=complex)
        J[:self.dim_k] = self.S[:self.dim_k]
        J[H.dim_h:H.dim_h + self.K.dim_E] = self.S[self.dim_k:]
        return J


def _gamma_shape(G, K):
    S = wold_wandering(K, local=True).basis
    return S, (G.dim_E, S.shape[1])


def build_cascade(G: TruncatedProcess, K: TruncatedProcess, gamma, N=None,
                  match=True) -> GammaCascade:
    """Assemble ``G <|_gamma K``.

    ``gamma`` is given in the bases ``S`` of ``E^k_*`` (as returned by
    :func:`fmprocess.process.wold_wandering` on ``K``) and the wandering
    basis of ``G``.  With ``match`` the compression is re-dilated and a
    unitary matching to the assembly is computed and checked.
    """
    if G.d != K.d:
        raise MultiplicityError(f"processes over {G.d} and {K.d} letters")
    N = G.N if N is None else N
    if G.N != N:
        G = retruncate(G, N)
    if K.N != N:
        K = retruncate(K, N)
    S, shape = _gamma_shape(G, K)
    gamma = as_cmatrix(gamma, rows=shape[0], cols=shape[1], name="gamma")
    gn = opnorm(gamma)
    if gn > 1 + NORM_TOL:
        raise ContractionError("gamma is not a contraction", gn - 1)
    nk, ng, ek, eg = K.dim_h, G.dim_h, K.dim_E, G.dim_E
    Dgs = psd_sqrt(np.eye(eg) - gamma @ adjoint(gamma)) if eg else np.zeros((0, 0))
    w, U = np.linalg.eigh(np.eye(eg) - gamma @ adjoint(gamma)) if eg else (np.zeros(0), None)
    Qd = orthonormal_range(U[:, w > 1e-10]).basis if eg and np.any(w > 1e-10) else \
        np.zeros((eg, 0), dtype=complex)
    ed = Qd.shape[1]
    n, e = nk + ng, ek + ed
    # iota: E^g -> (k (+) g) (+) (E^k (+) D)
    Sg = S @ adjoint(gamma)
    iota = np.zeros((n + e, eg), dtype=complex)
    iota[:nk] = Sg[:nk]
    iota[n:n + ek] = Sg[nk:]
    iota[n + ek:] = adjoint(Qd) @ Dgs
    top = []
    for tk, tg in zip(K.top, G.top):
        T = np.zeros((n + e, n), dtype=complex)
        T[:nk, :nk] = tk[:nk]
        T[n:n + ek, :nk] = tk[nk:]
        T[nk:n, nk:] = tg[:ng]
        T[:, nk:] += iota @ tg[ng:]
        top.append(T)
    H = assemble_process(G.d, N, n, e, top)
    casc_args = dict(G=G, K=K, gamma=gamma, H=H, S=S, iota=iota, defect_dim=ed)
    residuals = {"iota_isometry": opnorm(adjoint(iota) @ iota - np.eye(eg)) if eg else 0.0}
    if match:
        H_red = dilate(H.A, N)
        W0, res = unitary_equivalence(H, H_red)
        residuals.update({f"match_{k}": v for k, v in res.items()})
    else:
        H_red, W0 = None, None
    casc = GammaCascade(H_redilated=H_red, W0=W0, residuals=residuals, **casc_args)
    residuals.update(_assembly_residuals(casc))
    if match:
        worst = max(residuals["match_unitarity"], residuals["match_intertwining"])
        if worst > MATCH_TOL:
            raise ValidationError("assembled and re-dilated cascades do not match", worst)
    return casc


def _assembly_residuals(casc):
    """Piecewise check of the assembled row isometry on ``g``, on ``K`` and on the defect copies."""
    H, G, K = casc.H, casc.G, casc.K
    out = {}
    # on K: V Kemb = Kemb V^K on K's valid levels
    Ke = casc.K_embedding()
    mK = K.level_end(K.N - 1)
    out["on_K"] = max((float(abs(((V @ Ke) - (Ke @ VK))[:, :mK]).max())
                       for V, VK in zip(H.V, K.V)), default=0.0)
    # on G: V Gemb = Gemb V^G on G's valid levels
    Ge = casc.G_embedding()
    mG = G.level_end(G.N - 1)
    out["on_G"] = max((np.abs((V @ Ge[:, :mG]) - (Ge @ VG[:, :mG])).max(initial=0.0)
                       for V, VG in zip(H.V, G.V)), default=0.0)
    # defect copies: shifted canonically
    worst = 0.0
    nd = casc.defect_dim
    if nd:
        for k, V in enumerate(H.V, start=1):
            for w in H.words:
                if len(w) > H.N - 2:
                    continue
                src = H.block(w)
                dst = H.block(Word((k,) + w.letters, H.d))
                cols = slice(src.start + K.dim_E, src.stop)
                blk = V[:, cols].toarray()
                ref = np.zeros_like(blk)
                ref[dst.start + K.dim_E:dst.stop] = np.eye(nd)
                worst = max(worst, np.abs(blk - ref).max(initial=0.0))
    out["on_defect"] = worst
    out["embedding_isometry"] = opnorm(adjoint(Ge) @ Ge - np.eye(Ge.shape[1])) if Ge.size else 0.0
    return out


# ---------------------------------------------------------------------------
# Classification of extensions


def extension_gamma(H: TruncatedProcess, g, G=None, K=None, k=None, tol=1e-10):
    """``gamma = P_{E^g}|_{E^k_*}`` for a process with co-invariant ``g``.

    ``G`` and ``K`` are the dilations of the compressions to ``g`` and to
    ``k = h - g``; they are recomputed when not given, which fixes the
    bases in which ``gamma`` is expressed.  ``k`` is the frame of the
    complement in which a given ``K`` is written (default: a computed
    orthonormal basis).  Returns ``(gamma, info)``
    where ``info`` holds the embeddings of ``E^g`` and ``E^k_*`` in ``H``'s
    level-0/1 coordinates and the basis frames used.
    """
    Qg = _frame(g, H.dim_h, "g")
    _check_coinvariant(H.A, Qg, tol)
    if k is None:
        Qk = orthogonal_complement(Subspace(H.dim_h, Qg)).basis
    else:
        Qk = _frame(k, H.dim_h, "k")
        r = opnorm(adjoint(Qk) @ Qg)
        if Qk.shape[1] + Qg.shape[1] != H.dim_h or r > tol:
            raise DimensionError("k must be the orthogonal complement of g")
    if G is None:
        G = dilate([adjoint(Qg) @ a @ Qg for a in H.A], H.N)
    if K is None:
        K = dilate([adjoint(Qk) @ a @ Qk for a in H.A], H.N)
    n, ng, nk = H.dim_h, Qg.shape[1], Qk.shape[1]
    low = n + H.dim_E

    def lift(Q):
        out = np.zeros((low, Q.shape[1]), dtype=complex)
        out[:n] = Q
        return out

    Lg, Lk = lift(Qg), lift(Qk)
    # V_j Q_g = Q_g A^G_j^* + iota F^G_j  and  V_j Q_k = Q_k A^K_j^* + kappa F^K_j
    Rg = np.hstack([t @ Qg - Lg @ tg[:ng] for t, tg in zip(H.top, G.top)])
    Fg = np.hstack([tg[ng:] for tg in G.top])
    Rk = np.hstack([t @ Qk - Lk @ tk[:nk] for t, tk in zip(H.top, K.top)])
    Fk = np.hstack([tk[nk:] for tk in K.top])
    iota = np.linalg.lstsq(Fg.T, Rg.T, rcond=None)[0].T if G.dim_E else np.zeros((low, 0))
    kappa = np.linalg.lstsq(Fk.T, Rk.T, rcond=None)[0].T if K.dim_E else np.zeros((low, 0))
    res = max(opnorm(iota @ Fg - Rg), opnorm(kappa @ Fk - Rk))
    if res > 1e-8:
        raise ValidationError("wandering parts do not factor through the compressions", res)
    S = wold_wandering(K, local=True).basis
    J = Lk @ S[:nk] + kappa @ S[nk:]
    gamma = adjoint(iota) @ J
    return gamma, {"iota": iota, "kappa": kappa, "J": J, "Qg": Qg, "Qk": Qk,
                   "G": G, "K": K, "S": S, "residual": res}


def recover_gamma(casc: GammaCascade):
    """Recover ``gamma`` from the assembled process alone (plus ``G``, ``K`` for bases)."""
    gamma, _ = extension_gamma(casc.H, casc.g_frame(), G=casc.G, K=casc.K, k=casc.k_frame())
    return gamma


def cascade_geometry(casc: GammaCascade, depth=None):
    """Projection identities relating ``E^g``, ``E^k_*`` and the spaces ``G`` and ``K``.

    Checks ``P_G|_{E^k_*} = P_{E^g}|_{E^k_*}`` and
    ``P_K|_{E^g} = P_{E^k_*}|_{E^g}`` together with their translates by
    ``V_alpha`` for ``|alpha| <= depth``.  Returns a dict of residuals.
    """
    H = casc.H
    depth = H.N - 1 if depth is None else depth
    Ge = casc.G_embedding()
    Ke = casc.K_embedding().toarray()
    Eg = H.low_embedding(casc.iota)
    Ek = H.low_embedding(casc.wold_k_in_H())
    out = {"PG_on_Ek": 0.0, "PK_on_Eg": 0.0, "adjoint": 0.0}
    for w in enumerate_words(H.d, depth):
        eg, ek = H.apply(w, Eg), H.apply(w, Ek)
        out["PG_on_Ek"] = max(out["PG_on_Ek"],
                              opnorm(Ge @ (adjoint(Ge) @ ek) - eg @ (adjoint(eg) @ ek)))
        out["PK_on_Eg"] = max(out["PK_on_Eg"],
                              opnorm(Ke @ (adjoint(Ke) @ eg) - ek @ (adjoint(ek) @ eg)))
    out["adjoint"] = opnorm(adjoint(casc.iota) @ casc.wold_k_in_H() - casc.gamma)
    return out


def defect_unitary(L0, w, tol=1e-10):
    """Unitary carrying ``span{L0, w L'}`` onto ``L0 (+) D_rho`` with ``rho = P_{L0} w``.

    ``L0`` is an orthonormal frame and ``w`` an isometry, both in a common
    ambient space.  Returns ``(U, Lbasis, rho, Drho_frame, residual)``:
    ``U`` acts on coordinates w.r.t. ``Lbasis = [L0, L1]`` (``L1`` spanning
    ``L - L0``) and sends ``w xi`` to ``(rho xi, D_rho xi)``.
    """
    L0 = np.asarray(L0, dtype=complex)
    w = np.asarray(w, dtype=complex)
    r = opnorm(adjoint(w) @ w - np.eye(w.shape[1]))
    if r > tol:
        raise ValidationError("w is not an isometry", r)
    rho = adjoint(L0) @ w
    M = w - L0 @ rho
    L1 = orthonormal_range(M).basis
    Dsq = np.eye(w.shape[1]) - adjoint(rho) @ rho
    wv, Uv = np.linalg.eigh((Dsq + adjoint(Dsq)) / 2)
    keep = wv > 1e-10
    Qr = orthonormal_range(Uv[:, keep]).basis if keep.any() else np.zeros((w.shape[1], 0))
    Dr = psd_sqrt(Dsq)
    target = adjoint(Qr) @ Dr
    coords = adjoint(L1) @ M
    U1 = np.linalg.lstsq(coords.T, target.T, rcond=None)[0].T if L1.shape[1] else \
        np.zeros((Qr.shape[1], 0))
    a, b = L0.shape[1], Qr.shape[1]
    U = np.zeros((a + b, a + L1.shape[1]), dtype=complex)
    U[:a, :a] = np.eye(a)
    U[a:, a:] = U1
    res = opnorm(adjoint(U) @ U - np.eye(U.shape[1])) if U.shape[0] == U.shape[1] else float("inf")
    Lb = np.hstack([L0, L1])
    check = opnorm(U @ (adjoint(Lb) @ w) - np.vstack([rho, target]))
    return U, Lb, rho, Qr, max(res, check)


# ---------------------------------------------------------------------------
# Systems


def cascade_structure_maps(sysK: FMSystem, sysG: FMSystem, Gamma) -> FMSystem:
    """Block formulas of the ``Gamma``-cascade on ``k (+) g``."""
    if sysK.d != sysG.d:
        raise MultiplicityError("systems over different multiplicities")
    Gamma = as_cmatrix(Gamma, rows=sysG.dim_u, cols=sysK.dim_y, name="Gamma")
    nk, ng = sysK.dim_x, sysG.dim_x
    A, B = [], []
    for AK, AG, BK, BG in zip(sysK.A, sysG.A, sysK.B, sysG.B):
        A.append(np.block([[AK, np.zeros((nk, ng))], [BG @ Gamma @ sysK.C, AG]]))
        B.append(np.vstack([BK, BG @ Gamma @ sysK.D]))
    C = np.hstack([sysG.D @ Gamma @ sysK.C, sysG.C])
    D = sysG.D @ Gamma @ sysK.D
    return FMSystem(A, B, C, D)


def factorized_transfer(sysK, sysG, Gamma, N):
    """``sum_{alpha = beta sigma} T^{G,sigma} Gamma T^{K,beta}`` for ``|alpha| <= N``."""
    TK = transfer_coefficients(sysK, N)
    TG = transfer_coefficients(sysG, N)
    out = {}
    for a in enumerate_words(sysK.d, N):
        out[a] = sum(TG[s] @ Gamma @ TK[b] for b, s in factorizations(a))
    return out


def cascade_transfer_residual(sys, sysK, sysG, Gamma, N):
    T = transfer_coefficients(sys, N)
    F = factorized_transfer(sysK, sysG, Gamma, N)
    return max(np.abs(T[a] - F[a]).max(initial=0.0) for a in T)


@dataclass(frozen=True, eq=False)
class RepresentedCascade:
    representation: object
    sysK: FMSystem
    sysG: FMSystem
    Gamma: np.ndarray
    residual: float


def represented_cascade(casc: GammaCascade, i0K=None, j0G=None, i0G=None, j0K=None,
                        tol=1e-10):
    """Represent the cascade with ``U_0 = U^K_0`` and ``Y_0 = Y^G_0``.

    ``i0K`` embeds the input into ``E^k`` (default: all of it), ``j0G``
    embeds the output into ``g (+) E^g`` in ``G``'s level-0/1 coordinates
    (default: ``E^g``).  ``i0G`` (into ``E^g``) and ``j0K`` (into
    ``k (+) E^k``) are the inner spaces and must support ``gamma`` from the
    left and the right; defaults ``E^g`` and ``E^k_*`` give ``Gamma = gamma``.
    """
    G, K, H = casc.G, casc.K, casc.H
    eg, ek = G.dim_E, K.dim_E
    i0K = np.eye(ek, dtype=complex) if i0K is None else as_cmatrix(i0K, rows=ek, name="i0K")
    if j0G is None:
        j0G = np.zeros((G.dim_h + eg, eg), dtype=complex)
        j0G[G.dim_h:] = np.eye(eg)
    j0G = as_cmatrix(j0G, rows=G.dim_h + eg, name="j0G")
    i0G = np.eye(eg, dtype=complex) if i0G is None else as_cmatrix(i0G, rows=eg, name="i0G")
    j0K = casc.S if j0K is None else as_cmatrix(j0K, rows=K.dim_h + ek, name="j0K")
    gam = casc.gamma
    left = opnorm(i0G @ (adjoint(i0G) @ gam) - gam)
    SJ = adjoint(casc.S) @ j0K
    right = opnorm(gam @ SJ @ adjoint(SJ) - gam)
    if left > tol:
        raise SupportError("input space of G is not a left support of gamma", left)
    if right > tol:
        raise SupportError("output space of K is not a right support of gamma", right)
    repK = represent(K, i0K, j0K)
    repG = represent(G, i0G, j0G)
    Gamma = adjoint(i0G) @ gam @ SJ
    # embed the cascade's input and output spaces into H
    i0 = np.zeros((H.dim_E, i0K.shape[1]), dtype=complex)
    i0[:ek] = i0K
    j0 = np.zeros((H.dim_h + H.dim_E, j0G.shape[1]), dtype=complex)
    j0[K.dim_h:H.dim_h] = j0G[:G.dim_h]
    j0 += casc.iota @ j0G[G.dim_h:]
    rep = represent(H, i0, j0)
    formula = cascade_structure_maps(repK.system, repG.system, Gamma)
    from .fmsystem import max_difference
    residual = max_difference(rep.system, formula)
    return RepresentedCascade(rep, repK.system, repG.system, Gamma, residual)


def iterate_cascade(F: TruncatedProcess, G: TruncatedProcess, K: TruncatedProcess, gamma2,
                    gamma, N=None, tol=1e-10):
    """``F <|_{hat gamma_2} (G <|_gamma K)`` with ``hat gamma_2`` zero off ``E^g_*``.

    Returns ``(outer, inner)``.
    """
    inner = build_cascade(G, K, gamma, N)
    H = inner.H
    Sg = wold_wandering(inner.G, local=True).basis
    # E^g_* inside H's level-0/1 coordinates
    emb = np.zeros((H.dim_h + H.dim_E, Sg.shape[1]), dtype=complex)
    emb[inner.dim_k:H.dim_h] = Sg[:G.dim_h]
    emb += inner.iota @ Sg[G.dim_h:]
    SH = wold_wandering(H, local=True).basis
    r = opnorm(emb - SH @ (adjoint(SH) @ emb))
    if r > tol:
        raise ValidationError("E^g_* is not contained in E_*", r)
    gamma2 = as_cmatrix(gamma2, rows=F.dim_E if F.N == H.N else None, cols=Sg.shape[1],
                        name="gamma2")
    hat = gamma2 @ adjoint(emb) @ SH
    outer = build_cascade(F, H, hat, H.N)
    return outer, inner
