import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from fmprocess.errors import DimensionError, MultiplicityError
from fmprocess.fmsystem import (FMSystem, WordSignal, evolve, is_observable, observability_gramian,
                                observability_row, transfer_coeff, transfer_coefficients,
                                transfer_gramian)
from fmprocess.freeword import Word, enumerate_words, factorizations, word_product
from fmprocess.generate import random_system
from fmprocess.linalg import Subspace

seeds = st.integers(min_value=0, max_value=10_000)


def test_shape_validation():
    with pytest.raises(MultiplicityError):
        FMSystem([np.eye(2)], [np.ones((2, 1))] * 2, np.ones((1, 2)), np.ones((1, 1)))
    with pytest.raises(DimensionError):
        FMSystem([np.eye(2)], [np.ones((3, 1))], np.ones((1, 2)), np.ones((1, 1)))
    with pytest.raises(DimensionError):
        FMSystem([np.eye(2)], [np.ones((2, 1))], np.ones((1, 3)), np.ones((1, 1)))


def test_transfer_coeff_small_words():
    s = random_system(np.random.default_rng(1), d=2, dim_x=2)
    assert np.allclose(transfer_coeff(s, Word((), 2)), s.D)
    assert np.allclose(transfer_coeff(s, Word((2,), 2)), s.C @ s.B[1])
    # T^(1,2,1) = C A_1 A_2 B_1
    assert np.allclose(transfer_coeff(s, Word((1, 2, 1), 2)), s.C @ s.A[0] @ s.A[1] @ s.B[0])


@settings(max_examples=25)
@given(seeds)
def test_transfer_coefficients_match_word_products(seed):
    s = random_system(np.random.default_rng(seed), d=3, dim_x=3, dim_u=2, dim_y=2)
    T = transfer_coefficients(s, 3)
    for w, M in T.items():
        if len(w) == 0:
            ref = s.D
        else:
            rest = Word(w.letters[1:], 3)
            ref = s.C @ word_product(s.A, rest, "superscript") @ s.B[w[0] - 1]
        assert np.allclose(M, ref, atol=1e-12)
        assert np.allclose(M, transfer_coeff(s, w), atol=1e-12)


@settings(max_examples=25)
@given(seeds)
def test_evolution_is_convolution(seed):
    rng = np.random.default_rng(seed)
    s = random_system(rng, d=2, dim_x=2, dim_u=2, dim_y=1)
    N = 4
    u = WordSignal.from_function(2, N, 2, lambda w: rng.standard_normal(2))
    _, y = evolve(s, np.zeros(2), u, N)
    T = transfer_coefficients(s, N)
    for a in enumerate_words(2, N):
        ref = sum(T[sig] @ u[b] for b, sig in factorizations(a))
        assert np.allclose(y[a], ref, atol=1e-12)


def test_free_evolution_uses_observability_rows(rng):
    s = random_system(rng, d=2, dim_x=3)
    x0 = rng.standard_normal(3)
    _, y = evolve(s, x0, WordSignal.zeros(2, 3, 1), 3)
    for a in enumerate_words(2, 3):
        assert np.allclose(y[a], observability_row(s, a) @ x0)


def test_gramian_modes_agree_with_kron_solve(rng):
    s = random_system(rng, d=2, dim_x=3, dim_y=2)
    W_fp = observability_gramian(s, mode="fixed_point")
    L = sum(np.kron(a.conj().T, a.T) for a in s.A)
    ref = scipy.linalg.solve(np.eye(9) - L, (s.C.conj().T @ s.C).reshape(-1)).reshape(3, 3)
    assert np.allclose(W_fp, ref, atol=1e-10)
    W_tr = observability_gramian(s)
    assert np.allclose(W_tr, ref, atol=1e-9)
    W2 = observability_gramian(s, depth=2)
    direct = sum(observability_row(s, w).conj().T @ observability_row(s, w)
                 for w in enumerate_words(2, 2))
    assert np.allclose(W2, direct)


def test_transfer_gramian_partial_sums(rng):
    s = random_system(rng, d=2, dim_x=2, dim_u=1, dim_y=2)
    sums = transfer_gramian(s, 3)
    T = transfer_coefficients(s, 3)
    for n in range(4):
        ref = sum(T[w].conj().T @ T[w] for w in T if len(w) <= n)
        assert np.allclose(sums[n], ref)


def test_observability_verdicts():
    A = [np.array([[0.0, 1.0], [0.0, 0.0]])]
    s = FMSystem(A, [np.zeros((2, 1))], np.array([[1.0, 0.0]]), np.zeros((1, 1)))
    assert is_observable(s, depth=2)
    s2 = FMSystem([np.diag([0.5, 0.5])], [np.zeros((2, 1))], np.array([[1.0, 0.0]]),
                  np.zeros((1, 1)))
    assert not is_observable(s2, depth=4)
    assert is_observable(s2, Subspace.coordinates(2, [0]), depth=4)
    assert is_observable(s2, Subspace.zero(2))


def test_evolve_errors(rng):
    s = random_system(rng)
    with pytest.raises(DimensionError):
        evolve(s, np.zeros(3), WordSignal.zeros(2, 2, 1), 2)
