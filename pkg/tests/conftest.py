import numpy as np
import pytest

from cdloc.kernels import catalog

# lines recorded by the acceptance module, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def random_unitary(rng, n):
    Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def random_point(rng, m, radius=0.5):
    """Uniform-ish point with Euclidean norm below ``radius``; inside every catalog domain."""
    r = radius * rng.uniform(0, 1, m) / np.sqrt(m)
    return r * np.exp(2j * np.pi * rng.uniform(0, 1, m))


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def models():
    return catalog()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
