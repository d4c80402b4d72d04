import json
from pathlib import Path

import mpmath as mp
import pytest

from rab.specfun import SystemParams

PINS_PATH = Path(__file__).parent / "data" / "pins.json"
_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def pins():
    raw = json.loads(PINS_PATH.read_text())
    return {k: float(mp.mpf(v)) for k, v in raw.items()}


@pytest.fixture
def fig1_params():
    return SystemParams(k=100, mu=0.01, p_a=0.6, eps=1e-3)


@pytest.fixture(scope="session")
def acceptance_line():
    def record(criterion, passed, detail):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'} {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
