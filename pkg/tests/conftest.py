import numpy as np
import pytest

from epiinteract import ContingencyTable

# Table reconstructed from the printed estimates and SEs of the published
# Z ~ X + Y + X*Y example (n = 1000, n11 = 245).
TABLE_P = ContingencyTable.from_strata(a=(123, 135), b=(122, 134), c=(123, 118), d=(116, 129))
D1 = ContingencyTable.from_strata(a=(100, 100), b=(200, 100), c=(100, 200), d=(100, 200))
UNIFORM = ContingencyTable(*[50] * 8)

# Printed regression output: (Intercept), X, Y, X:Y
EXAMPLE1_COEF = (0.0930904, -0.1345902, 0.0007283, 0.1469936)
EXAMPLE1_SE = (0.1246494, 0.1792823, 0.1766264, 0.2533262)


def random_tables(n, seed=0, low=1, high=10**6):
    rng = np.random.default_rng(seed)
    return [ContingencyTable.from_array(row) for row in rng.integers(low, high + 1, size=(n, 8))]


@pytest.fixture
def table_p():
    return TABLE_P


@pytest.fixture
def d1():
    return D1


@pytest.fixture
def uniform():
    return UNIFORM


def synthetic_matrix(n=5000, m=10, seed=1, missing=0.02):
    """Random exposure matrix with a weak outcome signal and sprinkled missing values."""
    from epiinteract import ExposureMatrix

    rng = np.random.default_rng(seed)
    prev = rng.uniform(0.1, 0.6, size=m)
    exposures = (rng.random((m, n)) < prev[:, None]).astype(np.int8)
    eta = -0.3 + 0.4 * exposures[0] - 0.2 * exposures[1] + 0.3 * exposures[0] * exposures[2]
    outcome = (rng.random(n) < 1 / (1 + np.exp(-eta))).astype(np.int8)
    exposures[rng.random((m, n)) < missing] = -1
    outcome[rng.random(n) < missing / 2] = -1
    return ExposureMatrix(outcome, exposures, [f"g{i:02d}" for i in range(m)])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
