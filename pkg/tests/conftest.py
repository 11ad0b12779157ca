import numpy as np
import pytest

from mss.qcore import DensityMatrix, PureState


def random_pure_state(n: int, rng: np.random.Generator) -> PureState:
    """Haar-random pure state via normalised complex Gaussian amplitudes."""
    a = rng.normal(size=2 ** n) + 1j * rng.normal(size=2 ** n)
    return PureState(a / np.linalg.norm(a))


def random_density(n: int, rng: np.random.Generator, rank: int | None = None) -> DensityMatrix:
    """Random mixed state: normalised Wishart-style G G^dagger."""
    dim = 2 ** n
    r = rank or dim
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    m = g @ g.conj().T
    return DensityMatrix(m / np.trace(m).real)


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    dim = 2 ** n
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260808)
