from importlib import resources

import numpy as np
import pytest

from pmicopula import independence, lower_bound, m_gamma, upper_bound, v_copula
from pmicopula.families import fgm, frank, gaussian


@pytest.fixture(scope="session")
def faithful_path():
    return str(resources.files("pmicopula") / "data" / "faithful.csv")


@pytest.fixture
def grid():
    t = np.linspace(0.0, 1.0, 41)
    return np.meshgrid(t, t, indexing="ij")


SMOOTH = {
    "gaussian(0.5)": lambda: gaussian(0.5),
    "gaussian(-0.3)": lambda: gaussian(-0.3),
    "frank(3)": lambda: frank(3.0),
    "frank(-5)": lambda: frank(-5.0),
    "fgm(1)": lambda: fgm(1.0),
}

BASIC = {
    "Pi": independence,
    "M": upper_bound,
    "W": lower_bound,
    "M_Gamma": m_gamma,
    "V": v_copula,
}


_ACCEPTANCE = {}


@pytest.fixture
def acceptance_log():
    """Record one pass/fail line per acceptance criterion."""
    def record(number, ok, detail):
        _ACCEPTANCE[number] = (bool(ok), detail)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        ok, detail = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
