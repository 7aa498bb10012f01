import json
from importlib import resources

import numpy as np
import pytest

from fmprocess.cascade import build_cascade, extension_gamma
from fmprocess.generate import random_column_contraction, random_unital_extension
from fmprocess.process import dilate


def data_path(name):
    return resources.files("fmprocess") / "data" / name


def load_data(name):
    return json.loads(data_path(name).read_text())


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def isometric_column(rng, d, n):
    Q = np.linalg.qr(crandn(rng, d * n, n))[0]
    return [Q[k * n:(k + 1) * n] for k in range(d)]


def random_process(seed, d=None, n=None, N=4, unital=False):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4)) if d is None else d
    n = int(rng.integers(1, 5)) if n is None else n
    A = isometric_column(rng, d, n) if unital else random_column_contraction(rng, d, n)
    return dilate(A, N)


def unital_cascade(seed, d=2, dim_g=1, dim_k=2, decouple=0, N=4):
    """Cascade split off a unital extension along its co-invariant ``g``."""
    rng = np.random.default_rng(seed)
    A = random_unital_extension(rng, d, dim_g, dim_k, decouple)
    H = dilate(A, N)
    g = np.zeros((dim_g + dim_k, dim_g))
    g[dim_k:] = np.eye(dim_g)
    gamma, info = extension_gamma(H, g)
    return build_cascade(info["G"], info["K"], gamma, N)


def random_gamma_cascade(seed, kind="contraction", d=2, ng=1, nk=2, N=4):
    from fmprocess.process import wold_wandering
    rng = np.random.default_rng(seed)
    G = dilate(random_column_contraction(rng, d, ng), N)
    K = dilate(random_column_contraction(rng, d, nk), N)
    shape = (G.dim_E, wold_wandering(K, local=True).rank)
    X = crandn(rng, *shape)
    if kind == "zero":
        gamma = np.zeros(shape, dtype=complex)
    elif kind == "isometry":
        if shape[0] >= shape[1]:
            gamma = np.linalg.qr(X)[0]
        else:
            gamma = np.linalg.qr(X.conj().T)[0].conj().T
    else:
        gamma = 0.8 * X / np.linalg.norm(X, 2)
    return build_cascade(G, K, gamma, N)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        ok, detail = results[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({detail})")
