import time

import pytest

from forbearance.dynamics import DynamicsParams, build_system
from forbearance.econ_model import DemandSpec, GrowthParams

# growth parameters used in the stability example: A = 1, sigma = 1.2, phi = 0.4
BASE_GROWTH = GrowthParams(age=1.0, export_intensity=1.2, info_phi=0.4)
# 1.2 ** 0.6 evaluated at 50 digits with mpmath
BASE_Y_STAR = 1.1156006217298275
BASE_X_STAR = 0.5578003108649138

CRITERIA = pytest.StashKey[dict]()
STARTED = pytest.StashKey[float]()


def pytest_configure(config):
    config.stash[CRITERIA] = {}
    config.stash[STARTED] = time.perf_counter()


def pytest_collection_modifyitems(config, items):
    # the whole-suite timer must see every other test finish first
    items.sort(key=lambda item: item.get_closest_marker("runs_last") is not None)


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(CRITERIA, {})
    if not lines:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(lines):
        terminalreporter.write_line(lines[number])


@pytest.fixture
def criterion(request):
    """Record one pass/fail line for an acceptance criterion."""
    def record(number: int, title: str, passed: bool, detail: str) -> bool:
        line = f"[{'PASS' if passed else 'FAIL'}] {number}. {title}: {detail}"
        request.config.stash[CRITERIA][number] = line
        print(line)
        return passed
    return record


@pytest.fixture
def suite_elapsed(request):
    return lambda: time.perf_counter() - request.config.stash[STARTED]


@pytest.fixture
def base_growth():
    return BASE_GROWTH


@pytest.fixture
def base_system():
    return build_system(DynamicsParams(0.4, 0.2, BASE_GROWTH))


@pytest.fixture
def demand():
    return DemandSpec(intercept=5.0, own_slope=2.0, cross_slope=1.0)
