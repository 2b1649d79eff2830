import numpy as np
import pytest

from fieldwork.gp import Hyperparams
from fieldwork.scenario import GridSpec, build_scenario

_acceptance_results = []


@pytest.fixture(scope="session")
def spec():
    return GridSpec()


@pytest.fixture(scope="session")
def gp_scenario(spec):
    return build_scenario("gp", spec, seed=11)


@pytest.fixture(scope="session")
def gmm_scenario(spec):
    return build_scenario("gmm", spec, seed=107)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def scenario_hp():
    """Default scenario-generation hyperparameters (degree-valued length
    scale matching previously observed fields)."""
    return Hyperparams(-7.81, 1.68, 0.0)


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::" in report.nodeid:
        _acceptance_results.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _acceptance_results:
        terminalreporter.write_line(f"{outcome.upper():6s} {name}")
