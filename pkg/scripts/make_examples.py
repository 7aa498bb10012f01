"""Regenerate the example documents bundled in ``src/fmprocess/data``."""

import json
from pathlib import Path

import numpy as np
from scipy.stats import unitary_group

from fmprocess.fmsystem import FMSystem
from fmprocess.generate import random_density, random_system, stationary_state
from fmprocess.markov import MarkovChainSpec, scattering_ac
from fmprocess.process import dilate, wold_wandering
from fmprocess.serialize import cascade_spec_to_json, chain_to_json, system_to_json

OUT = Path(__file__).resolve().parents[1] / "src" / "fmprocess" / "data"


def isometric_system(rng, d, n):
    X = rng.standard_normal((d * n, n)) + 1j * rng.standard_normal((d * n, n))
    Q = np.linalg.qr(X)[0]
    A = [Q[k * n:(k + 1) * n] for k in range(d)]
    B = [np.full((n, 1), 0.5, dtype=complex) for _ in range(d)]
    return FMSystem(A, B, np.ones((1, n)) / np.sqrt(n), np.zeros((1, 1)))


def write(name, doc):
    (OUT / name).write_text(json.dumps(doc, indent=2) + "\n")


def main():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    psi = X @ X.conj().T
    psi /= np.trace(psi).real

    u = unitary_group.rvs(4, random_state=1)
    ergodic = MarkovChainSpec(2, 2, u, stationary_state(u, psi, 2, 2), psi)
    rep = scattering_ac(ergodic)
    assert rep.ac.verdict and rep.ergodic
    write("ergodic_qubit_chain.json", chain_to_json(ergodic))

    # controlled unitary: the diagonal of M_2 is preserved, so Z has a
    # two-dimensional fixed space and the chain is not ergodic
    U0 = unitary_group.rvs(2, random_state=2)
    U1 = unitary_group.rvs(2, random_state=3)
    u = np.kron(np.diag([1, 0]), U0) + np.kron(np.diag([0, 1]), U1)
    reducible = MarkovChainSpec(2, 2, u, np.diag([0.7, 0.3]), psi)
    rep = scattering_ac(reducible)
    assert rep.ac.verdict is False and not rep.ergodic
    write("reducible_chain.json", chain_to_json(reducible))

    rng = np.random.default_rng(11)
    G, K = isometric_system(rng, 2, 1), isometric_system(rng, 2, 2)
    shape = (dilate(G.A, 1).dim_E, wold_wandering(dilate(K.A, 1), local=True).rank)
    write("gamma_zero_cascade.json",
          cascade_spec_to_json(G, K, np.zeros(shape, dtype=complex), 4))

    write("sample_system.json", system_to_json(random_system(np.random.default_rng(7), 2, 2, 1, 1)))


if __name__ == "__main__":
    main()
