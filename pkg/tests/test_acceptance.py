"""Acceptance suite: one check per criterion, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py`` (the lines appear in the
terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import crandn, isometric_column, load_data, random_gamma_cascade, unital_cascade  # noqa: E402
from fmprocess.cascade import recover_gamma, represented_cascade, cascade_transfer_residual  # noqa: E402
from fmprocess.completeness import ac_check  # noqa: E402
from fmprocess.errors import InvarianceError  # noqa: E402
from fmprocess.fmsystem import WordSignal, evolve, transfer_coeff, transfer_coefficients  # noqa: E402
from fmprocess.freeword import Word, enumerate_words, factorizations  # noqa: E402
from fmprocess.generate import random_chain, random_system, random_unital_extension  # noqa: E402
from fmprocess.linalg import opnorm  # noqa: E402
from fmprocess.markov import associated_process, scattering_ac, support_subprocess  # noqa: E402
from fmprocess.process import (coinvariance_conditions, dilate, dilation_transition,  # noqa: E402
                               isometry_residual, kernel_blocks, measurement_probabilities,
                               represent, transition_power, unitality_conditions,
                               wandering_decomposition_residual)
from fmprocess.serialize import chain_from_json  # noqa: E402

RESULTS = {}


def record(n, ok, detail):
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def fifty_systems():
    out = []
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        d = int(rng.integers(1, 4))
        n = int(rng.integers(1, 5))
        out.append(random_system(rng, d=d, dim_x=n, dim_u=1, dim_y=1))
    return out


def oracle_defect_rank(A):
    d, n = len(A), A[0].shape[0]
    T = np.hstack([a.conj().T for a in A])
    return np.linalg.matrix_rank(np.eye(d * n) - T.conj().T @ T, tol=1e-8)


# ---------------------------------------------------------------------------


def check_1():
    worst_iso = worst_co = worst_orth = 0.0
    slowest = 0.0
    counts_ok = True
    for s in fifty_systems():
        t = time.perf_counter()
        P = dilate(s.A, 5)
        iso = isometry_residual(P)
        slowest = max(slowest, time.perf_counter() - t)
        worst_iso = max(worst_iso, iso)
        worst_co = max(worst_co, coinvariance_conditions(P)["coinvariant"][1])
        orth, count, angle = wandering_decomposition_residual(P)
        worst_orth = max(worst_orth, orth)
        words = len(enumerate_words(P.d, 4))
        counts_ok &= (count == P.dim == P.dim_h + P.dim_E * words
                      and P.dim_E == oracle_defect_rank(s.A) and angle < 1e-7)
    ok = worst_iso <= 1e-12 and worst_co <= 1e-12 and worst_orth <= 1e-12 and counts_ok \
        and slowest < 1.0
    return ok, (f"isometry {worst_iso:.1e}, coinvariance {worst_co:.1e}, "
                f"decomposition {worst_orth:.1e}, counts {counts_ok}, slowest {slowest:.2f}s")


def check_2():
    worst = 0.0
    consistent = True
    unital_seen = set()
    procs = [dilate(s.A, 5) for s in fifty_systems()]
    # unital instances so that both truth values of the unitality quadruple occur
    procs += [dilate(isometric_column(np.random.default_rng(s), 1 + s % 3, 1 + s % 4), 5)
              for s in range(10)]
    for i, P in enumerate(procs):
        rng = np.random.default_rng(i)
        x = crandn(rng, P.dim_h, P.dim_h)
        for n in range(5):
            worst = max(worst, opnorm(dilation_transition(P, x, n) - transition_power(P.A, x, n)))
        c = {ok for ok, _ in coinvariance_conditions(P).values()}
        u = {ok for ok, _ in unitality_conditions(P).values()}
        consistent &= len(c) == 1 and len(u) == 1
        unital_seen |= u
    ok = worst <= 1e-11 and consistent and unital_seen == {True, False}
    return ok, (f"Z_n vs Z^n {worst:.1e}, boolean groups consistent {consistent}, "
                f"unitality values seen {sorted(unital_seen)}")


def check_3():
    worst_k = worst_c = 0.0
    for seed in range(20):
        rng = np.random.default_rng(3000 + seed)
        d = 1 + seed % 3
        s0 = random_system(rng, d=d, dim_x=1 + seed % 3)
        rep = represent(dilate(s0.A, 5))
        s = rep.system
        words, K = kernel_blocks(rep, 4)
        for i, a in enumerate(words):
            for j, b in enumerate(words):
                if a.letters[:len(b)] == b.letters:
                    err = np.abs(K[i][j] - transfer_coeff(s, Word(a.letters[len(b):], d)))
                else:
                    err = np.abs(K[i][j])
                worst_k = max(worst_k, err.max(initial=0.0))
        u = WordSignal.from_function(d, 4, s.dim_u, lambda w: crandn(rng, s.dim_u))
        _, y = evolve(s, np.zeros(s.dim_x), u, 4)
        T = transfer_coefficients(s, 4)
        for a in enumerate_words(d, 4):
            ref = sum(T[sig] @ u[b] for b, sig in factorizations(a))
            worst_c = max(worst_c, np.abs(y[a] - ref).max(initial=0.0))
    return worst_k <= 1e-10 and worst_c <= 1e-10, \
        f"kernel {worst_k:.1e}, convolution {worst_c:.1e}"


def check_4():
    kinds = ["zero", "isometry", "contraction"]
    worst_rec = worst_match = 0.0
    direct_sum = True
    for seed in range(30):
        kind = kinds[seed % 3]
        c = random_gamma_cascade(4000 + seed, kind, d=1 + seed % 3, ng=1 + seed % 2,
                                 nk=1 + (seed // 3) % 3)
        worst_rec = max(worst_rec, opnorm(recover_gamma(c) - c.gamma))
        worst_match = max(worst_match, c.residuals["match_unitarity"],
                          c.residuals["match_intertwining"], c.residuals["match_compression"])
        if kind == "zero":
            nk = c.dim_k
            Ge, Ke = c.G_embedding(), c.K_embedding().toarray()
            for A, AG, AK, V, VG, VK in zip(c.H.A, c.G.A, c.K.A, c.H.dense_V(), c.G.dense_V(),
                                             c.K.dense_V()):
                direct_sum &= (np.array_equal(A[:nk, :nk], AK) and np.array_equal(A[nk:, nk:], AG)
                               and not A[:nk, nk:].any() and not A[nk:, :nk].any()
                               and np.array_equal(Ge.T @ V @ Ge, VG)
                               and np.array_equal(Ke.T @ V @ Ke, VK))
    ok = worst_rec <= 1e-10 and worst_match < 1e-9 and direct_sum
    return ok, f"recover {worst_rec:.1e}, matching {worst_match:.1e}, direct sum {direct_sum}"


def check_5():
    worst_b = worst_t = 0.0
    kinds = ["zero", "isometry", "contraction"]
    for seed in range(12):
        c = random_gamma_cascade(5000 + seed, kinds[seed % 3], d=1 + seed % 3, ng=1 + seed % 2,
                                 nk=1 + seed % 3)
        rc = represented_cascade(c)
        worst_b = max(worst_b, rc.residual)
        worst_t = max(worst_t, cascade_transfer_residual(rc.representation.system, rc.sysK,
                                                         rc.sysG, rc.Gamma, 5))
    return worst_b <= 1e-10 and worst_t <= 1e-10, \
        f"block formulas {worst_b:.1e}, factorized transfer {worst_t:.1e}"


def check_6():
    agree = True
    monotone = 0.0
    verdicts = []
    tried = 0
    seed = 0
    while len(verdicts) < 20 and tried < 80:
        d, ng, nk = 2 + seed % 2, 1 + seed % 2, 1 + seed % 3
        c = unital_cascade(6000 + seed, d=d, dim_g=ng, dim_k=nk, decouple=seed % 2)
        seed += 1
        tried += 1
        rep = ac_check(c)
        if not rep.unital or rep.inconclusive:
            continue
        agree &= len({rep.criterion_1b, rep.criterion_2a, rep.criterion_4_flag,
                      rep.criterion_5}) == 1
        monotone = min(monotone, rep.residuals["5_min_increment"])
        verdicts.append(rep.verdict)
    ok = len(verdicts) == 20 and agree and monotone >= -1e-10 and len(set(verdicts)) == 2
    return ok, (f"{len(verdicts)} conclusive of {tried} tried, agree {agree}, "
                f"true/false {verdicts.count(True)}/{verdicts.count(False)}, "
                f"min increment {monotone:.1e}")


def check_7():
    erg = chain_from_json(load_data("ergodic_qubit_chain.json"))
    red = chain_from_json(load_data("reducible_chain.json"))
    re = scattering_ac(erg, maxiter=500, tol=1e-6, layer_tol=1e-9)
    rr = scattering_ac(red, maxiter=500, tol=1e-6)
    inner = re.inner
    ok = (re.convergence_gap < 1e-6 and re.iterations <= 500 and re.ergodic and re.ac.verdict
          and rr.ac.verdict is False and rr.convergence_gap > 0.1 and not rr.ergodic
          and inner.get("flag") and inner["transfer_residual"] < 1e-6
          and inner["observability_residual"] < 1e-6)
    return ok, (f"ergodic gap {re.convergence_gap:.1e} at n={re.iterations}, "
                f"reducible gap {rr.convergence_gap:.2f}, inner residuals "
                f"{inner.get('transfer_residual', float('nan')):.1e}/"
                f"{inner.get('observability_residual', float('nan')):.1e} at depth "
                f"{inner.get('depth')}")


def check_8():
    worst = 0.0
    for seed in range(6):
        rng = np.random.default_rng(8000 + seed)
        d, n = 2 + seed % 2, 1 + seed % 3
        P = dilate(isometric_column(rng, d, n), 4)
        xi = np.zeros(P.dim, dtype=complex)
        v = crandn(rng, n)
        xi[:n] = v / np.linalg.norm(v)
        for a in enumerate_words(d, 3):
            eta = P.apply(a, xi[:, None])[:, 0]
            for m in range(1, len(a) + 1):
                p = measurement_probabilities(P, eta, m)
                worst = max(worst, abs(p[a[m - 1] - 1] - 1))
    return worst <= 1e-12, f"worst deviation {worst:.1e}"


def invariant_on_coinvariant(seed):
    rng = np.random.default_rng(9000 + seed)
    d, ng, nk = 2 + seed % 2, 1 + seed % 2, 1 + seed % 3
    A = random_unital_extension(rng, d, ng, nk)
    Ag = [a[nk:, nk:] for a in A]
    L = sum(np.kron(a, a.conj()) for a in Ag)
    w, V = np.linalg.eig(L)
    r = V[:, np.argmin(np.abs(w - 1))].reshape(ng, ng)
    r = (r + r.conj().T) / 2
    r /= np.trace(r).real
    rho = np.zeros((ng + nk, ng + nk), dtype=complex)
    rho[nk:, nk:] = r
    return dilate(A, 3), rho


def check_9():
    worst = 0.0
    rejected = 0
    for seed in range(20):
        if seed < 10:
            P, rho = invariant_on_coinvariant(seed)
        else:
            spec = random_chain(np.random.default_rng(9100 + seed))
            P, g, _ = associated_process(spec, 2)
            rho = g @ g.conj().T
        _, res = support_subprocess(P, rho)
        worst = max(worst, res)
        rng = np.random.default_rng(seed)
        X = crandn(rng, P.dim_h, P.dim_h)
        bumped = rho + 0.05 * X @ X.conj().T / np.trace(X @ X.conj().T).real
        bumped /= np.trace(bumped).real
        try:
            support_subprocess(P, bumped)
        except InvarianceError:
            rejected += 1
    return worst <= 1e-9 and rejected == 20, f"worst residual {worst:.1e}, rejected {rejected}/20"


CHECKS = {n: globals()[f"check_{n}"] for n in range(1, 10)}


@pytest.mark.parametrize("n", range(1, 10))
def test_criterion(n):
    ok, detail = CHECKS[n]()
    record(n, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in CHECKS.items():
        ok, detail = fn()
        failed += not record(n, ok, detail)
    sys.exit(1 if failed else 0)
