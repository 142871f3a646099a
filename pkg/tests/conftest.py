import pytest

from scpir import StorageProfile, build_scheme
from _support import ACCEPTANCE_LOG

HETERO_MU = ["0.1", "0.2", "0.2", "0.25", "0.3", "0.4", "0.65", "0.9"]
NONINT_MU = ["1/5", "1/5", "2/5", "3/5", "1"]


@pytest.fixture
def hetero_profile():
    return StorageProfile(HETERO_MU)


@pytest.fixture
def nonint_profile():
    return StorageProfile(NONINT_MU)


@pytest.fixture(scope="session")
def disjoint_scheme():
    return build_scheme(StorageProfile.uniform(4, "1/2"), 3, 16, placement="disjoint")


@pytest.fixture(scope="session")
def cyclic_scheme():
    return build_scheme(StorageProfile.uniform(5, "3/5"), 2, placement="cyclic")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)
