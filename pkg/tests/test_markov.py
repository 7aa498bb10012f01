import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import crandn, load_data
from fmprocess.errors import InvarianceError, StationarityError, ValidationError
from fmprocess.generate import random_chain, random_density, random_unital_extension
from fmprocess.linalg import opnorm
from fmprocess.markov import (MarkovChainSpec, associated_isometry, associated_process,
                              ergodicity_check, gns_build, gns_pair, invariance_residual,
                              predual_map, scattering_ac, stationarity_residual,
                              support_subprocess)
from fmprocess.process import dilate, transition
from fmprocess.serialize import chain_from_json

seeds = st.integers(min_value=0, max_value=10_000)


@settings(max_examples=20, deadline=None)
@given(seeds, st.integers(1, 3), st.integers(1, 3))
def test_gns_inner_products(seed, n, rank):
    rng = np.random.default_rng(seed)
    rank = min(rank, n)
    rho = random_density(rng, n, rank)
    c = gns_build(n, rho)
    assert c.dim == n * rank
    assert np.allclose(c.Omega, np.eye(c.dim)[0])
    a, b = crandn(rng, n, n), crandn(rng, n, n)
    assert np.isclose(np.vdot(c.vector(a), c.vector(b)), c.inner(a, b))
    assert np.allclose(c.vector(c.representative(c.vector(a))), c.vector(a))
    pa, pb = c.left_action(a), c.left_action(b)
    assert np.allclose(c.left_action(a @ b), pa @ pb)
    assert np.allclose(c.left_action(a.conj().T), pa.conj().T)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_predual_duality(seed):
    rng = np.random.default_rng(seed)
    spec = random_chain(rng)
    M = predual_map(spec)
    rho = random_density(rng, 2)
    S = (M @ rho.reshape(-1)).reshape(2, 2)
    a = crandn(rng, 2, 2)
    lhs = np.trace(S @ a)
    rhs = np.trace(np.kron(rho, spec.psi) @ spec.j(a))
    assert np.isclose(lhs, rhs)
    assert stationarity_residual(spec) < 1e-10


def test_random_phi_is_not_stationary():
    spec = random_chain(np.random.default_rng(3))
    bad = MarkovChainSpec(2, 2, spec.u, np.diag([0.95, 0.05]), spec.psi)
    assert stationarity_residual(bad) > 1e-3
    with pytest.raises(StationarityError):
        associated_isometry(bad)


def test_spec_validation():
    with pytest.raises(ValidationError):
        MarkovChainSpec(1, 2, 2 * np.eye(2), np.eye(1), np.eye(2) / 2)
    with pytest.raises(ValidationError):
        MarkovChainSpec(1, 2, np.eye(2), np.eye(1), np.diag([1.5, -0.5]))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_associated_isometry_entries(seed):
    rng = np.random.default_rng(seed)
    spec = random_chain(rng)
    gns = gns_pair(spec)
    v1 = associated_isometry(spec, gns)
    a, x, y = crandn(rng, 2, 2), crandn(rng, 2, 2), crandn(rng, 2, 2)
    lhs = np.vdot(np.kron(gns.phi.vector(x), gns.psi.vector(y)), v1 @ gns.phi.vector(a))
    rhs = np.trace(np.kron(spec.phi, spec.psi) @ np.kron(x.conj().T, y.conj().T) @ spec.j(a))
    assert np.isclose(lhs, rhs)
    assert opnorm(v1.conj().T @ v1 - np.eye(v1.shape[1])) < 1e-10


def test_associated_process_is_unital_with_coinvariant_vacuum():
    spec = chain_from_json(load_data("ergodic_qubit_chain.json"))
    proc, g, A = associated_process(spec)
    assert proc.d == 4 and proc.dim_h == 4 and proc.dim_E == 12
    assert np.allclose(transition(A, np.eye(4)), np.eye(4))
    for a in A:
        assert np.allclose(a @ g, g * (g.conj().T @ a @ g))


def fixed_space_dim_by_eig(A):
    L = sum(np.kron(a.conj().T, a.T) for a in A)
    return int(np.sum(np.abs(np.linalg.eigvals(L) - 1) < 1e-7))


@pytest.mark.parametrize("name,ergodic", [("ergodic_qubit_chain.json", True),
                                          ("reducible_chain.json", False)])
def test_bundled_chains(name, ergodic):
    spec = chain_from_json(load_data(name))
    rep = scattering_ac(spec, tol=1e-6)
    _, _, A = associated_process(spec)
    assert rep.ergodic is ergodic
    assert rep.fixed_dim == fixed_space_dim_by_eig(A)
    assert rep.ac.verdict is ergodic
    assert rep.agreement
    if ergodic:
        assert rep.convergence_gap < 1e-6 and rep.iterations <= 500
        assert rep.inner["flag"]
    else:
        assert rep.convergence_gap > 0.1


def coinvariant_state(seed, d=2, ng=2, nk=2):
    """Invariant state supported on the co-invariant ``g`` of a unital extension."""
    rng = np.random.default_rng(seed)
    A = random_unital_extension(rng, d, ng, nk)
    n = ng + nk
    Ag = [a[nk:, nk:] for a in A]
    L = sum(np.kron(a, a.conj()) for a in Ag)  # rho -> sum A rho A^* on row-major vectors
    w, V = np.linalg.eig(L)
    r = V[:, np.argmin(np.abs(w - 1))].reshape(ng, ng)
    r = (r + r.conj().T) / 2
    r /= np.trace(r).real
    rho = np.zeros((n, n), dtype=complex)
    rho[nk:, nk:] = r
    return dilate(A, 3), rho, nk


@pytest.mark.parametrize("seed", range(5))
def test_support_subprocess(seed):
    proc, rho, nk = coinvariant_state(seed)
    assert invariance_residual(proc.A, rho) < 1e-10
    g, res = support_subprocess(proc, rho)
    assert res < 1e-9
    assert np.allclose(g[:nk], 0)
    bumped = rho.copy()
    bumped[0, 0] += 0.05
    bumped /= np.trace(bumped).real
    with pytest.raises(InvarianceError):
        support_subprocess(proc, bumped)


def test_ergodicity_check_simple():
    assert ergodicity_check([np.eye(2)]) == (False, 4)
    A = [np.array([[0, 1], [0, 0]]), np.array([[0, 0], [1, 0]])]
    ok, dim = ergodicity_check(A)
    assert ok and dim == 1
