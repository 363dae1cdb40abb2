import pytest

from gammagh.distributions import GammaGhParams

# filled by test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def base_params():
    """a=1, beta=1, mu=0, sigma=0.5: the parameter set used by the moment checks."""
    return GammaGhParams(a=1.0, beta=1.0, mu=0.0, sigma=0.5)


@pytest.fixture
def figure_params():
    """b = mu = 1, sigma = 0.5 with a = 1, as in the path figures."""
    return GammaGhParams(a=1.0, beta=1.0, mu=1.0, sigma=0.5)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
