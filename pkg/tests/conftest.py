import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from scipy.stats import unitary_group

settings.register_profile(
    "default",
    max_examples=30,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_density(n_qubits: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    d = 2**n_qubits
    rank = rank or d
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_unitary(d: int, seed: int) -> np.ndarray:
    return unitary_group.rvs(d, random_state=seed)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
