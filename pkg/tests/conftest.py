import numpy as np
import pytest

from iontransport.chain import ChainSpec
from iontransport.constants import TWO_PI, ion_mass

ACCEPTANCE_LINES = {}


@pytest.fixture
def report():
    """Record one summary line per acceptance criterion."""

    def _report(number, passed, detail):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[number])


@pytest.fixture(scope="session")
def reference_spec():
    """Three calcium ions at 40 kHz axial confinement with staggered local frequencies."""
    return ChainSpec(
        n_ions=3,
        omega_z=TWO_PI * 40e3,
        masses=[ion_mass("Ca40")] * 3,
        local_frequencies=[TWO_PI * f * 1e3 for f in (435.0, 439.5, 445.0)],
        frequencies_are_renormalized=True,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
