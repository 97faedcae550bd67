import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from superent.states import StateVector  # noqa: E402

R2 = 1 / math.sqrt(2)


@pytest.fixture
def bell():
    return StateVector(2, 2, [R2, 0, 0, R2])


@pytest.fixture
def phi_plus():
    return StateVector(2, 2, [R2, 0, 0, R2])


@pytest.fixture
def phi_minus():
    return StateVector(2, 2, [R2, 0, 0, -R2])


@pytest.fixture
def ket00():
    return StateVector(2, 2, [1, 0, 0, 0])


@pytest.fixture
def ket11():
    return StateVector(2, 2, [0, 0, 0, 1])


def schmidt_pair(a, b):
    """Diagonal pair on (d, d): a on the first len(a) levels, b on the rest."""
    d = len(a) + len(b)
    m1 = np.zeros((d, d), dtype=complex)
    m2 = np.zeros((d, d), dtype=complex)
    for i, x in enumerate(a):
        m1[i, i] = x
    for i, x in enumerate(b):
        m2[len(a) + i, len(a) + i] = x
    return StateVector(d, d, m1.ravel()), StateVector(d, d, m2.ravel())


# criterion number -> (passed, description, detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, text, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {text}  [{detail}]")
