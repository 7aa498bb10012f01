"""Observability inside cascades and asymptotic completeness.

For a cascade ``H = G <|_gamma K`` observed through the wandering space
``E^g`` of the subprocess, the output pair is ``(A, C)`` with
``A_k = V_k^*|_h`` and ``C = P_{E^g}|_h``.  :func:`ac_check` evaluates the
classical list of criteria independently:

``1b``  the observability Gramian restricted to ``k`` is positive definite;
``2a``  ``span{(A^alpha)^* g}`` is all of ``h``;
``3a``  ``P_h P_G P_h = 1`` (``G = H``), via the limit of ``P_g + W_n``;
``4``   ``V^K`` is a row shift and ``gamma`` is isometric;
``5``   ``Z^n(P_g) -> 1`` (only when ``Z`` is unital).

Iterative criteria report ``True`` on convergence, ``False`` when the
iteration stalls away from the target, and ``None`` when ``maxiter`` runs
out first.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .fmsystem import FMSystem, _stein_step, observability_gramian, transfer_gramian
from .linalg import Subspace, adjoint, min_eig, opnorm, orthogonal_complement, orthonormal_range
from .process import TruncatedProcess, transition, wold_wandering

__all__ = ["ACReport", "RowShiftResult", "InnerReport", "ac_check", "row_shift_test",
           "inner_check", "distance_profile", "iterate_to_limit", "output_pair"]

STALL_TOL = 1e-13
RANK_EIG_TOL = 1e-9
ISOMETRY_TOL = 1e-8
MONOTONE_TOL = 1e-10


@dataclass
class LimitResult:
    flag: bool | None
    iterations: int
    gap: float
    last_step: float
    min_increment: float = float("inf")


def iterate_to_limit(step, X0, target, tol, maxiter, monotone=False):
    """Iterate ``X <- step(X)`` until ``||X - target|| < tol``.

    Stops with ``False`` when an update is below :data:`STALL_TOL` while the
    gap is still above ``tol``.  With ``monotone`` the smallest eigenvalue
    of every increment is tracked.
    """
    X = X0
    gap = opnorm(X - target)
    last = float("inf")
    worst = float("inf")
    for n in range(maxiter + 1):
        if gap < tol:
            return LimitResult(True, n, gap, last, worst)
        if n == maxiter:
            break
        Xn = step(X)
        last = opnorm(Xn - X)
        if monotone:
            worst = min(worst, min_eig(Xn - X))
        X = Xn
        gap = opnorm(X - target)
        if last < STALL_TOL and gap >= tol:
            return LimitResult(False, n + 1, gap, last, worst)
    return LimitResult(None, maxiter, gap, last, worst)


@dataclass
class RowShiftResult:
    flag: bool | None
    decay: bool | None
    deficit: bool | None
    iterations: dict
    residuals: dict


def row_shift_test(K: TruncatedProcess, maxiter=500, tol=1e-6):
    """Decide whether the dilation ``V^K`` is a row shift.

    Two tests: the norm decay ``||Z_K^n(1)|| -> 0``, and the deficit
    ``||1 - sum_{|alpha|<n} (C_* A^alpha)^*(C_* A^alpha)|| -> 0`` where
    ``C_*`` is the compression to the Wold wandering space, i.e. how well
    ``k`` is exhausted by the translates of ``E^k_*``.  Disagreement gives
    ``flag=None``.
    """
    n = K.dim_h
    if n == 0:
        return RowShiftResult(True, True, True, {"decay": 0, "deficit": 0},
                              {"decay": 0.0, "deficit": 0.0})
    A = K.A
    I = np.eye(n)
    decay = iterate_to_limit(lambda X: transition(A, X), I, np.zeros((n, n)), tol, maxiter)
    S = wold_wandering(K, local=True).basis
    Cs = adjoint(S[:n])
    Q = adjoint(Cs) @ Cs
    deficit = iterate_to_limit(lambda W: Q + _stein_step(A, W), np.zeros((n, n)), I, tol,
                               maxiter)
    flags = {decay.flag, deficit.flag}
    flag = decay.flag if len(flags) == 1 else None
    return RowShiftResult(flag, decay.flag, deficit.flag,
                          {"decay": decay.iterations, "deficit": deficit.iterations},
                          {"decay": decay.gap, "deficit": deficit.gap})


@dataclass
class ACReport:
    """Verdicts of the completeness criteria with their numerical evidence."""

    criterion_1b: bool
    criterion_2a: bool
    criterion_3a: bool | None
    criterion_4: tuple
    criterion_5: bool | None
    unital: bool
    verdict: bool | None
    inconclusive: bool
    consistent: bool
    residuals: dict = field(default_factory=dict)
    iterations: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)
    tol: float = 1e-6
    depth: int = 0
    maxiter: int = 500
    criterion_4_flag: bool | None = None

    def to_dict(self):
        out = asdict(self)
        out["criterion_4"] = list(self.criterion_4)
        return out


def output_pair(casc):
    """``(A, C)`` of the cascade observed through ``E^g``."""
    H = casc.H
    return H.A, adjoint(casc.iota[:H.dim_h])


def _krylov_rank(A, Q, depth):
    B = orthonormal_range(Q).basis if Q.shape[1] else Q
    n = Q.shape[0]
    for _ in range(depth):
        if B.shape[1] == n:
            break
        grown = orthonormal_range(np.hstack([B] + [adjoint(a) @ B for a in A])).basis
        if grown.shape[1] == B.shape[1]:
            break
        B = grown
    return B.shape[1]


def ac_check(casc, maxiter=500, tol=1e-6, depth=None, rank_tol=RANK_EIG_TOL):
    """Evaluate the asymptotic-completeness criteria for a built cascade.

    ``depth`` bounds the word length for the finite criteria ``1b`` and
    ``2a`` (default ``dim_h``, enough for kernels and Krylov spaces to
    stabilize).  ``tol`` is the convergence tolerance for iterated
    criteria; ``rank_tol`` the eigenvalue threshold for injectivity.
    """
    H = casc.H
    n, ng, nk = H.dim_h, casc.dim_g, casc.dim_k
    depth = max(n, 1) if depth is None else depth
    A, C = output_pair(casc)
    Qg, Qk = casc.g_frame(), casc.k_frame()
    res, its, notes = {}, {}, []
    sysobs = FMSystem(A, [np.zeros((n, 0))] * H.d, C, np.zeros((C.shape[0], 0)))

    # 1b: injectivity of the observation of k
    W = observability_gramian(sysobs, depth=depth)
    lam = min_eig(adjoint(Qk) @ W @ Qk) if nk else float("inf")
    c1b = bool(lam > rank_tol)
    res["1b_min_eig"] = lam if nk else None

    # 2a: span of (A^alpha)^* g
    r = _krylov_rank(A, Qg, depth)
    c2a = r == n
    res["2a_rank"] = r

    # 3a: P_h P_G P_h -> 1 through the Gramian series, cross-checked in the dilation
    Pg = Qg @ adjoint(Qg)
    Q = adjoint(C) @ C
    lim = iterate_to_limit(lambda M: Pg + Q + _stein_step(A, M - Pg), Pg, np.eye(n), tol,
                           maxiter)
    c3a = lim.flag
    res["3a_gap"] = lim.gap
    its["3a"] = lim.iterations
    Ge = casc.G_embedding()
    Mdil = Ge[:n] @ adjoint(Ge[:n])
    Mrec = Pg + observability_gramian(sysobs, depth=H.N - 1)
    res["3a_dilation_crosscheck"] = opnorm(Mdil - Mrec)

    # 4: row shift and isometric gamma
    rs = row_shift_test(casc.K, maxiter=maxiter, tol=tol)
    g = casc.gamma
    iso_res = opnorm(adjoint(g) @ g - np.eye(g.shape[1])) if g.shape[1] else 0.0
    iso = bool(iso_res < ISOMETRY_TOL)
    c4 = (rs.flag, iso)
    c4_flag = None if rs.flag is None else bool(rs.flag and iso)
    if rs.flag is False or not iso:
        c4_flag = False
    res["4_row_shift"] = rs.residuals
    res["4_gamma_isometry"] = iso_res
    its["4_row_shift"] = rs.iterations
    if rs.flag is None:
        notes.append("row-shift tests disagree or did not settle")

    # 5: only for unital Z
    unital_res = opnorm(transition(A, np.eye(n)) - np.eye(n)) if n else 0.0
    unital = bool(unital_res <= 1e-9)
    res["unital"] = unital_res
    c5 = None
    if unital:
        l5 = iterate_to_limit(lambda X: transition(A, X), Pg, np.eye(n), tol, maxiter,
                              monotone=True)
        c5 = l5.flag
        res["5_gap"] = l5.gap
        res["5_min_increment"] = l5.min_increment
        its["5"] = l5.iterations
        if l5.min_increment < -MONOTONE_TOL:
            notes.append("Z^n(P_g) failed to increase monotonically")
    else:
        notes.append("criterion 5 not applicable: Z is not unital")

    completeness = [c3a, c4_flag] + ([c5] if unital else [])
    conclusive = [c for c in completeness if c is not None]
    inconclusive = len(conclusive) < len(completeness)
    verdict = conclusive[0] if conclusive and len(set(conclusive)) == 1 else None
    if conclusive and len(set(conclusive)) > 1:
        notes.append("completeness criteria disagree")
    everything = set(conclusive) | {c1b, c2a}
    consistent = len(everything) <= 1
    if not consistent and verdict is not None and {c1b, c2a} != {verdict}:
        notes.append("observability of k does not match G = H"
                     + ("" if unital else " (non-unital cascade)"))
    return ACReport(c1b, bool(c2a), c3a, c4, c5, unital, verdict, inconclusive, consistent,
                    res, its, notes, tol, depth, maxiter, c4_flag)


@dataclass
class InnerReport:
    flag: bool | None
    transfer_residual: float
    observability_residual: float
    depth: int
    converged: bool
    monotone: bool


def inner_check(rep, k_frame=None, depth=None, tol=1e-6, layer_tol=1e-9, maxdepth=500):
    """Isometry of the transfer function and of the observability map on ``k``.

    With ``depth=None`` word layers are added until both layer contributions
    fall below ``layer_tol`` (or ``maxdepth`` is hit, giving ``None``).
    """
    sys = rep.system if hasattr(rep, "system") else rep
    n = sys.dim_x
    Qk = np.eye(n) if k_frame is None else np.asarray(k_frame, dtype=complex)
    Ik = np.eye(Qk.shape[1])
    Iu = np.eye(sys.dim_u)
    Q = adjoint(sys.C) @ sys.C
    T = adjoint(sys.D) @ sys.D
    W = np.zeros((n, n), dtype=complex)
    prevT, prevO = T, np.zeros_like(Ik)
    monotone = True
    converged = False
    limit = maxdepth if depth is None else depth
    used = 0
    for m in range(1, limit + 1):
        W = Q + _stein_step(sys.A, W)
        Tm = T + sum(adjoint(b) @ W @ b for b in sys.B)
        Om = adjoint(Qk) @ W @ Qk
        dT, dO = opnorm(Tm - prevT), opnorm(Om - prevO)
        monotone &= min_eig(Tm - prevT) >= -MONOTONE_TOL and min_eig(Om - prevO) >= -MONOTONE_TOL
        prevT, prevO = Tm, Om
        used = m
        if depth is None and dT < layer_tol and dO < layer_tol:
            converged = True
            break
    if depth is not None:
        converged = True
    rT = opnorm(prevT - Iu)
    rO = opnorm(prevO - Ik) if Qk.shape[1] else 0.0
    flag = bool(rT < tol and rO < tol) if converged else None
    return InnerReport(flag, rT, rO, used, converged, bool(monotone))


def distance_profile(casc, xi, n_max):
    """``||xi||^2 - sum_{|alpha|<n} ||C A^alpha xi||^2`` for ``n = 0..n_max``.

    ``xi`` is given in coordinates of ``k``.
    """
    A, C = output_pair(casc)
    Qk = casc.k_frame()
    x = Qk @ np.asarray(xi, dtype=complex).reshape(-1)
    Q = adjoint(C) @ C
    W = np.zeros((len(x), len(x)), dtype=complex)
    base = float(np.vdot(x, x).real)
    out = [base]
    for _ in range(n_max):
        W = Q + _stein_step(A, W)
        out.append(base - float(np.vdot(x, W @ x).real))
    return np.array(out)
