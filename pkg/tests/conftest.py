import numpy as np
import pytest

from coopshift import _kernels
from coopshift.dipole import Transition


@pytest.fixture
def sr():
    return Transition()


@pytest.fixture(params=_kernels.available_backends())
def backend(request):
    return _kernels.get_backend(request.param)


def direct_pair_sum(positions, transition):
    """Brute-force (1/M) sum over ordered pairs of the far-field pair shift."""
    k = 2 * np.pi / transition.wavelength
    a = 0.375 * (2.0 / 3.0) * transition.oscillator_strength_total
    m = len(positions)
    total = 0.0
    for i in range(m):
        for j in range(m):
            if i != j:
                kr = k * abs(positions[i] - positions[j])
                total += -a * np.cos(kr) / kr
    return total / m


_ACCEPTANCE = pytest.StashKey[dict]()


@pytest.fixture
def criterion(request):
    """Record the outcome of one acceptance criterion for the end-of-run summary.

    Usage: ``criterion(number, title, passed, detail)``; returns `passed`.
    """
    table = request.config.stash.setdefault(_ACCEPTANCE, {})

    def record(number, title, passed, detail=""):
        table[number] = (title, bool(passed), detail)
        return bool(passed)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    table = config.stash.get(_ACCEPTANCE, None)
    if not table:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(table):
        title, passed, detail = table[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
