import json

import numpy as np
import pytest

from fmprocess.errors import DimensionError
from fmprocess.generate import random_cascade, random_chain, random_instance, random_system
from fmprocess.linalg import is_column_contraction, opnorm
from fmprocess.markov import stationarity_residual
from fmprocess.serialize import cascade_spec_from_json


@pytest.mark.parametrize("kind", ["system", "cascade", "chain"])
def test_same_seed_same_bytes(kind):
    a = json.dumps(random_instance(kind, seed=5))
    b = json.dumps(random_instance(kind, seed=5))
    c = json.dumps(random_instance(kind, seed=6))
    assert a == b and a != c


def test_system_is_contractive():
    s = random_system(np.random.default_rng(7), d=2, dim_x=2)
    assert is_column_contraction(s.A)[0]


@pytest.mark.parametrize("seed", range(5))
def test_chain_is_stationary(seed):
    spec = random_chain(np.random.default_rng(seed), n=2, m=2)
    assert stationarity_residual(spec) < 1e-10


@pytest.mark.parametrize("kind", ["zero", "isometry", "contraction"])
def test_cascade_gamma_kinds(kind):
    G, K, gamma, depth = random_cascade(np.random.default_rng(2), gamma_kind=kind)
    if kind == "zero":
        assert not gamma.any()
    elif kind == "isometry":
        s = np.linalg.svd(gamma, compute_uv=False)
        assert np.allclose(s, 1)
    else:
        assert opnorm(gamma) == pytest.approx(0.7)
    G2, K2, gamma2, depth2 = cascade_spec_from_json(random_instance("cascade", 2, gamma_kind=kind))
    assert np.array_equal(gamma2, gamma) and depth2 == depth


@pytest.mark.parametrize("dims", [dict(d=4), dict(dim_x=7), dict(dim_u=-1)])
def test_bounds(dims):
    with pytest.raises(DimensionError):
        random_instance("system", 0, **dims)
