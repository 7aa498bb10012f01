"""Seeded random instances at desk scale."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from .errors import DimensionError
from .fmsystem import FMSystem
from .linalg import adjoint, opnorm
from .process import dilate, wold_wandering

__all__ = ["MAX_DIM", "MAX_D", "random_column_contraction", "random_system",
           "random_unital_extension", "random_cascade", "random_chain", "random_density",
           "random_instance", "stationary_state"]

MAX_DIM = 6
MAX_D = 3


def _check_bounds(d=1, **dims):
    if not 1 <= d <= MAX_D:
        raise DimensionError(f"multiplicity d={d} outside 1..{MAX_D}")
    for name, v in dims.items():
        if not 0 <= v <= MAX_DIM:
            raise DimensionError(f"{name}={v} outside 0..{MAX_DIM}")


def _crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_column_contraction(rng, d, n, norm=0.9):
    """``A_1..A_d`` with ``||sum A_k^* A_k|| = norm^2``."""
    X = _crandn(rng, d * n, n)
    if n:
        X *= norm / opnorm(X)
    return [X[k * n:(k + 1) * n] for k in range(d)]


def random_system(rng, d=2, dim_x=2, dim_u=1, dim_y=1, norm=0.9):
    _check_bounds(d, dim_x=dim_x, dim_u=dim_u, dim_y=dim_y)
    A = random_column_contraction(rng, d, dim_x, norm)
    B = [_crandn(rng, dim_x, dim_u) / 2 for _ in range(d)]
    C = _crandn(rng, dim_y, dim_x) / 2
    D = _crandn(rng, dim_y, dim_u) / 2
    return FMSystem(A, B, C, D)


def random_unital_extension(rng, d, dim_g, dim_k, decouple=0):
    """Column isometry ``A`` on ``k (+) g`` with ``g`` co-invariant.

    The first ``decouple`` coordinates of ``k`` are mapped into themselves,
    which produces a unital piece of the quotient that ``g`` cannot see.
    """
    n = dim_g + dim_k
    fixed = min(decouple, dim_k)

    def block_isometry(lo, hi):
        m = hi - lo
        cols = np.zeros((d * n, m), dtype=complex)
        if m:
            Q = np.linalg.qr(_crandn(rng, d * m, m))[0]
            for j in range(d):
                cols[j * n + lo:j * n + hi] = Q[j * m:(j + 1) * m]
        return cols

    cols_g = block_isometry(dim_k, n)
    cols_f = block_isometry(0, fixed)
    taken = np.hstack([cols_f, cols_g])
    rest = _crandn(rng, d * n, dim_k - fixed)
    rest -= taken @ (adjoint(taken) @ rest)
    if rest.shape[1]:
        rest = np.linalg.qr(rest)[0]
    col = np.hstack([cols_f, rest, cols_g])
    return [col[j * n:(j + 1) * n] for j in range(d)]


def random_cascade(rng, d=2, dim_g=1, dim_k=2, depth=3, gamma_kind="contraction"):
    """Systems ``G``, ``K`` and a ``gamma`` of the requested kind.

    ``gamma_kind`` is one of ``contraction`` (norm 0.7), ``isometry``
    (when the dimensions allow it), ``zero``.
    """
    _check_bounds(d, dim_g=dim_g, dim_k=dim_k)
    G = random_system(rng, d, dim_g, 1, 1)
    K = random_system(rng, d, dim_k, 1, 1)
    eg = dilate(G.A, 1).dim_E
    sk = wold_wandering(dilate(K.A, 1), local=True).rank
    gamma = _random_gamma(rng, eg, sk, gamma_kind)
    return G, K, gamma, depth


def _random_gamma(rng, eg, sk, kind):
    if kind == "zero" or eg == 0 or sk == 0:
        return np.zeros((eg, sk), dtype=complex)
    X = _crandn(rng, eg, sk)
    if kind == "isometry":
        if eg >= sk:
            return np.linalg.qr(X)[0][:, :sk]
        return adjoint(np.linalg.qr(adjoint(X))[0][:, :eg])
    if kind == "contraction":
        return 0.7 * X / opnorm(X)
    raise ValueError(f"unknown gamma kind {kind!r}")


def random_density(rng, n, rank=None):
    rank = n if rank is None else rank
    X = _crandn(rng, n, rank)
    rho = X @ adjoint(X)
    return rho / np.trace(rho).real


def stationary_state(u, psi, n, m):
    """Fixed point of ``S(rho) = Tr_C[u^* (rho (x) psi) u]`` closest to eigenvalue 1."""
    from .markov import MarkovChainSpec, predual_map
    spec = MarkovChainSpec(n, m, u, np.eye(n) / n, psi)
    w, V = np.linalg.eig(predual_map(spec))
    i = int(np.argmin(np.abs(w - 1)))
    rho = V[:, i].reshape(n, n)
    rho = (rho + adjoint(rho)) / 2
    rho = rho / np.trace(rho).real
    # an eigenvector may be indefinite when the fixed space is degenerate
    wr, U = np.linalg.eigh(rho)
    if wr[0] < -1e-12:
        rho = (U * np.abs(wr)) @ adjoint(U)
        rho = rho / np.trace(rho).real
    return (rho + adjoint(rho)) / 2


def random_chain(rng, n=2, m=2):
    from .markov import MarkovChainSpec
    _check_bounds(1, n=n, m=m)
    seed = int(rng.integers(2 ** 31))
    u = unitary_group.rvs(n * m, random_state=seed) if n * m > 1 else np.eye(1)
    psi = random_density(rng, m)
    phi = stationary_state(u, psi, n, m)
    return MarkovChainSpec(n, m, u, phi, psi)


def random_instance(kind, seed=0, **dims):
    """JSON-ready document for a random ``system``, ``cascade`` or ``chain``."""
    from .serialize import cascade_spec_to_json, chain_to_json, system_to_json
    rng = np.random.default_rng(seed)
    if kind == "system":
        return system_to_json(random_system(rng, **dims))
    if kind == "cascade":
        G, K, gamma, depth = random_cascade(rng, **dims)
        return cascade_spec_to_json(G, K, gamma, depth)
    if kind == "chain":
        return chain_to_json(random_chain(rng, **dims))
    raise ValueError(f"unknown instance kind {kind!r}")
