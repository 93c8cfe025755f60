import pytest

from cavity_router.model import FIG2_COUPLINGS, CouplingMatrix

# filled by test_acceptance; printed once at the end of the run
ACCEPTANCE_LINES = []


@pytest.fixture
def fig2_couplings():
    return CouplingMatrix(**FIG2_COUPLINGS)


@pytest.fixture
def symmetric_couplings():
    return CouplingMatrix(0.25, 0.25, 0.25, 0.25)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
