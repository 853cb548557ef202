import math

import numpy as np
import pytest

from kiparc.core import TWO_PI, DeviceModes, RingGeometry, ScatteringParams, TuningModel

MHZ = TWO_PI * 1e6

# gain-map fit values (rates quoted as rate / 2 pi in MHz)
MAP_PARAMS = ScatteringParams(4.597 * MHZ, 3.210 * MHZ, 7.408 * MHZ)
# interference fits: signal and idler
FRINGE_SIGNAL = ScatteringParams(4.55 * MHZ, 3.57 * MHZ, 7.00 * MHZ)
FRINGE_IDLER = ScatteringParams(4.96 * MHZ, 3.41 * MHZ, 7.45 * MHZ)

RING = RingGeometry.from_impedances(2.2e-3, 1.0e-4, 940.0, 1320.0)
TUNING = TuningModel(5.5e9, 6.3e9, 779e-6, 1033e-6)


def modes_for(params, f_a=5.5e9, f_b=6.3e9):
    return DeviceModes(TWO_PI * f_a, TWO_PI * f_b, params)


def random_params(rng, detuned=True):
    """Random stable parameters (below threshold), rad/s."""
    ka, kb = rng.uniform(0.5, 10.0, 2) * MHZ
    xi = rng.uniform(0.0, 0.97) * 2.0 * math.sqrt(ka * kb) * np.exp(1j * rng.uniform(-math.pi, math.pi))
    da, db = (rng.uniform(-5.0, 5.0, 2) * MHZ) if detuned else (0.0, 0.0)
    return ScatteringParams(ka, kb, xi, da, db)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line; printed again in the terminal summary."""

    def _report(number, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}"
        print(line)
        _ACCEPTANCE_LINES.append(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)
