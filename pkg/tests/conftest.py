"""Shared fixtures; collects acceptance verdicts for the terminal summary."""

import pytest

from sirg_ising import ConstantKernel, ModelParams, SpinnedGraph

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def acceptance(request):
    """Record ``(label, passed, detail)`` for the acceptance summary."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def record(label, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'} {label}: {detail}"
        lines.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)


@pytest.fixture
def path8():
    return SpinnedGraph(8, [1] * 8, [(i, i + 1) for i in range(7)])


@pytest.fixture
def triangle():
    return SpinnedGraph(3, [1, 1, -1], [(0, 1), (0, 2), (1, 2)])


@pytest.fixture
def er_kernel():
    return ConstantKernel(1.0)


@pytest.fixture
def zero_field():
    return ModelParams(0.0)
