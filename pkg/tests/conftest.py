import numpy as np
import pytest

# label matrix of four samples from classes 1, 3, 2, 3 (0-based: 0, 2, 1, 2)
EQ4_LABELS = np.array([0, 2, 1, 2])
EQ4_H = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 1.0],
    ]
)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def random_instance(rng, c=3, d=6, n=9):
    """Small random FDLSR state with every class populated."""
    labels = np.concatenate([np.arange(c), rng.integers(0, c, n - c)])
    H = np.zeros((c, n))
    H[labels, np.arange(n)] = 1.0
    X = rng.standard_normal((d, n))
    X /= np.linalg.norm(X, axis=0)
    return X, H, labels


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
