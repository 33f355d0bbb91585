import pytest

from plprelay import McConfig, default_params, simulate


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def small_cfg():
    return McConfig(drops=20_000, seed=7, batch=2000)


@pytest.fixture(scope="session")
def small_sample(params, small_cfg):
    return simulate(params, small_cfg, 0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
