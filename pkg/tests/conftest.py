from pathlib import Path

import numpy as np
import pytest

from probframe.frame import build_right_inverse
from probframe.qubitframe import six_state_set

SAMPLES = Path(__file__).resolve().parent.parent / "samples"


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)


@pytest.fixture
def bell_rho() -> np.ndarray:
    psi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    return np.outer(psi, psi.conj())


@pytest.fixture(scope="session")
def six_state():
    return six_state_set(1)


@pytest.fixture(scope="session")
def six_state_inverse(six_state):
    return build_right_inverse(six_state)


@pytest.fixture
def samples() -> Path:
    return SAMPLES
