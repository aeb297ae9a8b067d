import numpy as np
import pytest

from lefthand_sim import PRESETS, SweepSpec, preset, run_sweep


@pytest.fixture(scope="session")
def default_sweeps():
    """Default-grid sweeps (both sources, verbatim generator) for every preset."""
    return {name: run_sweep(SweepSpec(preset(name))) for name in PRESETS}


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20161009)


def pytest_configure(config):
    config._acceptance_lines = []


@pytest.fixture
def acceptance(request):
    """Record one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config._acceptance_lines

    def record(criterion, passed, detail=""):
        lines.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
        print(lines[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
