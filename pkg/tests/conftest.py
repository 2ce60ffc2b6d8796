from dataclasses import dataclass, field

import pytest

from rydberg_cd.pulsegen import PulseParams
from rydberg_cd.units import mhz


@dataclass(frozen=True)
class ConstantDrive:
    """Time-independent drive values for any scheme (test helper)."""

    scheme_kind: str
    consts: dict = field(default_factory=dict)
    span: tuple = (0.0, 1.0)

    def values(self, t):
        return dict(self.consts)


@pytest.fixture
def fig2_pulse():
    return PulseParams(omega_max=mhz(20), delta0=mhz(10), T=0.05)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
