import numpy as np
import pytest

from miqos import default_config

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def link(cfg):
    return cfg.link()


@pytest.fixture(scope="session")
def budget(link):
    return link[0]


@pytest.fixture(scope="session")
def dist(link):
    return link[1]


@pytest.fixture(scope="session")
def cons(cfg):
    return cfg.constraints


@pytest.fixture(scope="session")
def cfg20(cfg):
    """Reference link with a 20 W budget: the peak cap binds inside the support."""
    return cfg.with_overrides(avg_power_w=20.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_log():
    def record(line: str) -> None:
        ACCEPTANCE_LINES.append(line)
        print(line)

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
