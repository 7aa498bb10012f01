"""Stationary quantum Markov chains on matrix algebras and their weak processes.

A chain is given by ``j(a) = u (a (x) 1_m) u^*`` from ``M_n`` into
``M_n (x) M_m`` together with states ``phi`` on ``M_n`` and ``psi`` on
``M_m``.  The GNS spaces of ``(M_n, phi)`` and ``(M_m, psi)`` play the
roles of ``h`` and of the multiplicity space; the associated isometry
``v_1: a Omega_phi -> j(a) Omega_phi (x) Omega_psi`` is the column
contraction ``A`` of the associated (unital) process, and the line through
``Omega_phi`` is a co-invariant subspace.

Matrices are vectorized row-major throughout: ``vec(a)[i*n + j] = a[i, j]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .cascade import build_cascade, extension_gamma
from .completeness import ACReport, ac_check, inner_check
from .errors import (DimensionError, InputError, InvarianceError, NotUnitalError,
                     StationarityError, SupportError, ValidationError)
from .linalg import adjoint, as_cmatrix, fix_phases, opnorm, orthonormal_range
from .process import dilate, represent, transition

__all__ = ["MarkovChainSpec", "GNSComponent", "GNSData", "gns_build", "gns_pair",
           "stationarity_residual", "associated_isometry", "associated_process",
           "support_subprocess", "invariance_residual", "ergodicity_check",
           "scattering_ac", "ScatteringReport", "predual_map"]

GNS_TOL = 1e-10
STATE_TOL = 1e-10
STATIONARY_TOL = 1e-9


def _check_density(rho, name):
    rho = as_cmatrix(rho, name=name)
    if rho.shape[0] != rho.shape[1]:
        raise DimensionError(f"{name} must be square")
    herm = opnorm(rho - adjoint(rho))
    if herm > STATE_TOL:
        raise ValidationError(f"{name} is not Hermitian", herm)
    rho = (rho + adjoint(rho)) / 2
    w = np.linalg.eigvalsh(rho)
    if w[0] < -STATE_TOL:
        raise ValidationError(f"{name} is not positive semidefinite", -w[0])
    tr = abs(np.trace(rho) - 1)
    if tr > STATE_TOL:
        raise ValidationError(f"{name} does not have unit trace", tr)
    return rho


@dataclass(frozen=True)
class MarkovChainSpec:
    """``(n, m, u, phi, psi)`` with unitary ``u`` of size ``nm``."""

    n: int
    m: int
    u: np.ndarray
    phi: np.ndarray
    psi: np.ndarray

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise DimensionError("algebra dimensions must be positive")
        u = as_cmatrix(self.u, self.n * self.m, self.n * self.m, name="u")
        r = opnorm(adjoint(u) @ u - np.eye(u.shape[0]))
        if r > STATE_TOL:
            raise ValidationError("u is not unitary", r)
        phi = _check_density(as_cmatrix(self.phi, self.n, self.n, name="phi"), "phi")
        psi = _check_density(as_cmatrix(self.psi, self.m, self.m, name="psi"), "psi")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "psi", psi)

    def j(self, a):
        a = as_cmatrix(a, self.n, self.n, name="a")
        return self.u @ np.kron(a, np.eye(self.m)) @ adjoint(self.u)


def predual_map(spec: MarkovChainSpec):
    """Matrix of ``S(rho) = Tr_C[u^* (rho (x) psi) u]`` on row-major vectors.

    ``phi`` is stationary exactly when ``S(phi) = phi``.
    """
    n, m = spec.n, spec.m
    M = np.zeros((n * n, n * n), dtype=complex)
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1
            X = adjoint(spec.u) @ np.kron(E, spec.psi) @ spec.u
            M[:, i * n + j] = np.einsum("apbp->ab", X.reshape(n, m, n, m)).reshape(-1)
    return M


def stationarity_residual(spec: MarkovChainSpec):
    """``max |(phi (x) psi)(j(E_ij)) - phi(E_ij)|`` over matrix units."""
    n = spec.n
    state = np.kron(spec.phi, spec.psi)
    worst = 0.0
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1
            lhs = np.trace(state @ spec.j(E))
            rhs = np.trace(spec.phi @ E)
            worst = max(worst, abs(lhs - rhs))
    return float(worst)


@dataclass(frozen=True, eq=False)
class GNSComponent:
    """GNS space of ``(M_n, rho)`` in an orthonormal basis with ``Omega`` first.

    ``L`` maps row-major ``vec(a)`` to the coordinates of the class of ``a``;
    ``null`` spans the null space of the GNS form.
    """

    n: int
    rho: np.ndarray
    L: np.ndarray
    null: np.ndarray

    @property
    def dim(self):
        return self.L.shape[0]

    @property
    def Omega(self):
        return self.L @ np.eye(self.n).reshape(-1)

    def vector(self, a):
        return self.L @ as_cmatrix(a, self.n, self.n, name="a").reshape(-1)

    def representative(self, xi):
        """An algebra element whose class is ``xi``."""
        return (np.linalg.pinv(self.L) @ np.asarray(xi, dtype=complex)).reshape(self.n, self.n)

    def left_action(self, x):
        """Operator of left multiplication by ``x`` on the GNS space."""
        x = as_cmatrix(x, self.n, self.n, name="x")
        return self.L @ np.kron(x, np.eye(self.n)) @ np.linalg.pinv(self.L)

    def inner(self, a, b):
        return np.trace(self.rho @ adjoint(a) @ b)


def gns_build(n, rho):
    """GNS construction for ``(M_n, rho)`` with form ``<a, b> = tr(rho a^* b)``."""
    rho = _check_density(as_cmatrix(rho, n, n, name="state"), "state")
    if opnorm(rho) == 0:
        raise InputError("zero state")
    M = np.kron(np.eye(n), rho.T)
    w, U = np.linalg.eigh(M)
    keep = w > GNS_TOL * max(1.0, w[-1])
    L = np.sqrt(w[keep])[:, None] * adjoint(U[:, keep])
    om = L @ np.eye(n).reshape(-1)
    om = om / np.linalg.norm(om)
    # rotate so that Omega is the first basis vector
    R = np.linalg.qr(np.column_stack([om, np.eye(len(om))]))[0][:, :len(om)]
    R[:, 0] *= np.vdot(R[:, 0], om)
    R[:, 1:] = fix_phases(R[:, 1:])
    L = adjoint(R) @ L
    return GNSComponent(n, rho, L, U[:, ~keep])


@dataclass(frozen=True, eq=False)
class GNSData:
    phi: GNSComponent
    psi: GNSComponent

    @property
    def h_dim(self):
        return self.phi.dim

    @property
    def P_dim(self):
        return self.psi.dim

    @property
    def Omega_phi(self):
        return self.phi.Omega

    @property
    def Omega_psi(self):
        return self.psi.Omega

    def left_action(self, x):
        return self.phi.left_action(x)


def gns_pair(spec: MarkovChainSpec):
    return GNSData(gns_build(spec.n, spec.phi), gns_build(spec.m, spec.psi))


def _jmap(spec, gns):
    """Linear map ``vec(a) -> coordinates of j(a) Omega (x) Omega`` in ``h (x) P``."""
    n, m = spec.n, spec.m
    Lp, Ls = gns.phi.L, gns.psi.L
    cols = []
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1
            b = spec.j(E).reshape(n, m, n, m).transpose(0, 2, 1, 3).reshape(n * n, m * m)
            cols.append((Lp @ b @ Ls.T).reshape(-1))
    return np.column_stack(cols)


def associated_isometry(spec: MarkovChainSpec, gns: GNSData = None, tol=STATIONARY_TOL):
    """``v_1: a Omega_phi -> j(a) Omega_phi (x) Omega_psi`` as a matrix ``h -> h (x) P``."""
    gns = gns_pair(spec) if gns is None else gns
    r = stationarity_residual(spec)
    if r > tol:
        raise StationarityError("phi is not stationary for the chain", r)
    J = _jmap(spec, gns)
    wd = opnorm(J @ gns.phi.null) if gns.phi.null.size else 0.0
    if wd > tol:
        raise ValidationError("associated isometry is not well defined on GNS classes", wd)
    v1 = J @ np.linalg.pinv(gns.phi.L)
    iso = opnorm(adjoint(v1) @ v1 - np.eye(v1.shape[1]))
    if iso > tol:
        raise ValidationError("associated map is not isometric", iso)
    return v1


def associated_process(spec: MarkovChainSpec, N=2, gns: GNSData = None):
    """Dilation of ``A`` with ``v_1 xi = sum_k A_k xi (x) eps_k``; returns ``(proc, g, A)``.

    ``g`` is the frame of the line through ``Omega_phi`` (the first basis vector).
    """
    gns = gns_pair(spec) if gns is None else gns
    v1 = associated_isometry(spec, gns)
    d = gns.P_dim
    A = [v1[k::d, :] for k in range(d)]
    proc = dilate(A, N)
    g = np.zeros((gns.h_dim, 1), dtype=complex)
    g[0, 0] = 1
    r = max(opnorm(a @ g - g @ (adjoint(g) @ a @ g)) for a in A)
    if r > 1e-10:
        raise SupportError("Omega_phi does not span a co-invariant line", r)
    return proc, g, A


def invariance_residual(A, rho):
    """``max |tr(rho Z(E_ij)) - tr(rho E_ij)|`` over matrix units."""
    n = rho.shape[0]
    worst = 0.0
    for i in range(n):
        for j in range(n):
            E = np.zeros((n, n))
            E[i, j] = 1
            worst = max(worst, abs(np.trace(rho @ transition(A, E)) - rho[j, i]))
    return float(worst)


def support_subprocess(proc, state, tol=STATIONARY_TOL):
    """Support of a ``Z``-invariant state as a co-invariant subspace.

    ``state`` is a unit vector or a density matrix on ``h``.  Returns
    ``(g_frame, residual)`` with the residual ``||(P_k (x) 1) V^* P_g||``
    computed in the dilation.
    """
    st = np.asarray(state, dtype=complex)
    if st.ndim == 1:
        st = np.outer(st, st.conj())
    rho = _check_density(as_cmatrix(st, proc.dim_h, proc.dim_h, name="state"), "state")
    r = invariance_residual(proc.A, rho)
    if r > tol:
        raise InvarianceError("state is not invariant for the transition operator", r)
    g = orthonormal_range(rho, tol=GNS_TOL).basis
    Pk = np.eye(proc.dim_h) - g @ adjoint(g)
    G = proc.h_frame() @ g
    worst = 0.0
    for Va in proc.V_adj:
        X = Va @ G
        worst = max(worst, opnorm(Pk @ X[:proc.dim_h]), opnorm(X[proc.dim_h:]))
    if worst > tol:
        raise SupportError("support of the invariant state is not co-invariant", worst)
    return g, worst


def ergodicity_check(A, tol=1e-9):
    """Dimension of the fixed space of ``Z``; ergodic iff it is one.

    Returns ``(ergodic, dimension)``.  Requires ``Z(1) = 1``.
    """
    A = [as_cmatrix(a, name="A_k") for a in A]
    n = A[0].shape[0]
    r = opnorm(transition(A, np.eye(n)) - np.eye(n))
    if r > tol:
        raise NotUnitalError("ergodicity check needs a unital transition operator", r)
    L = sum(np.kron(adjoint(a), a.T) for a in A)
    s = scipy.linalg.svdvals(L - np.eye(n * n))
    dim = int(np.sum(s <= max(tol, 1e-8)))
    return dim == 1, dim


@dataclass
class ScatteringReport:
    ac: ACReport
    ergodic: bool
    fixed_dim: int
    gns_dims: tuple
    stationarity_residual: float
    norm_profile: list
    convergence_gap: float
    iterations: int
    agreement: bool
    inner: dict = field(default_factory=dict)

    def to_dict(self):
        return {"ac": self.ac.to_dict(), "ergodic": self.ergodic, "fixed_dim": self.fixed_dim,
                "gns_dims": list(self.gns_dims),
                "stationarity_residual": self.stationarity_residual,
                "norm_profile": self.norm_profile, "convergence_gap": self.convergence_gap,
                "iterations": self.iterations, "agreement": self.agreement,
                "inner": self.inner}


def scattering_ac(spec: MarkovChainSpec, N=2, maxiter=500, tol=1e-6, layer_tol=1e-9):
    """Asymptotic completeness of the chain through its associated cascade.

    Builds the associated process, splits it along ``g = C Omega_phi``,
    runs :func:`fmprocess.completeness.ac_check` and reports the norms
    ``sqrt(<xi, Z^n(P_g) xi>)`` for the GNS basis vectors, which is how
    ``||P_{g (x) P^n} v_n xi||`` is computed.  The ergodicity verdict of
    ``Z`` is reported alongside.
    """
    gns = gns_pair(spec)
    proc, g, A = associated_process(spec, N, gns)
    gamma, info = extension_gamma(proc, g)
    casc = build_cascade(info["G"], info["K"], gamma, N)
    report = ac_check(casc, maxiter=maxiter, tol=tol)
    ergodic, fixed_dim = ergodicity_check(A)
    n = proc.dim_h
    X = g @ adjoint(g)
    profile = []
    its = 0
    for its in range(maxiter + 1):
        profile.append(np.sqrt(np.clip(np.diag(X).real, 0, None)).tolist())
        if opnorm(X - np.eye(n)) < tol or its == maxiter:
            break
        Xn = transition(A, X)
        if opnorm(Xn - X) < 1e-13:
            X = Xn
            profile.append(np.sqrt(np.clip(np.diag(X).real, 0, None)).tolist())
            break
        X = Xn
    gap = opnorm(X - np.eye(n))
    inner = {}
    if report.verdict:
        rep = represent(casc.H, None, casc.iota)
        ir = inner_check(rep, k_frame=casc.k_frame(), tol=tol, layer_tol=layer_tol,
                         maxdepth=maxiter)
        inner = {"flag": ir.flag, "transfer_residual": ir.transfer_residual,
                 "observability_residual": ir.observability_residual, "depth": ir.depth}
    agree = report.verdict is not None and report.verdict == ergodic
    return ScatteringReport(report, ergodic, fixed_dim, (gns.h_dim, gns.P_dim),
                            stationarity_residual(spec), profile[-1], gap, its, agree, inner)
