import numpy as np
import pytest

from qfdiv import rng
from qfdiv.condent import BipartiteState


def random_hermitian(dim: int, seed: int) -> np.ndarray:
    g = rng.complex_gaussian(rng.generator(seed), (dim, dim))
    return (g + g.conj().T) / 2.0


def bell_matrix() -> np.ndarray:
    m = np.zeros((4, 4))
    m[np.ix_((0, 3), (0, 3))] = 0.5
    return m


@pytest.fixture
def bell_state() -> BipartiteState:
    return BipartiteState(bell_matrix(), (2, 2))
