import numpy as np
import pytest

from scartower.statevector import StateVector


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_state(rng, dims) -> StateVector:
    n = int(np.prod(dims))
    vec = rng.normal(size=n) + 1j * rng.normal(size=n)
    vec /= np.linalg.norm(vec)
    return StateVector(tuple(dims), vec)


def haar_unitary(rng, n) -> np.ndarray:
    z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
