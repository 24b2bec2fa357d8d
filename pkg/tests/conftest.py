import pytest

from afshar_sim.field import make_grid

LAMBDA = 532e-9


@pytest.fixture
def fine_grid():
    return make_grid(2**14, 1e-6, LAMBDA)


def default_plan(scenario, **overrides):
    """Plan built from the CLI defaults for ``scenario``, with parameter overrides."""
    from afshar_sim.cli import build_plan
    from afshar_sim.config import parse_config

    return build_plan(parse_config({"scenario": scenario, scenario: overrides}))


@pytest.fixture(scope="session")
def modified_plan():
    return default_plan("modified")


@pytest.fixture(scope="session")
def classic_plan():
    return default_plan("classic")


@pytest.fixture(scope="session")
def modified_matrix(modified_plan):
    from afshar_sim.scenarios import run_matrix

    return run_matrix(modified_plan, photons=100_000, seed=7)


@pytest.fixture(scope="session")
def classic_matrix(classic_plan):
    from afshar_sim.scenarios import run_matrix

    return run_matrix(classic_plan, photons=100_000, seed=7)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(k for k in results if isinstance(k, int)):
        terminalreporter.write_line(results[key])
