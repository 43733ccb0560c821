import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE = []


def record_criterion(number, ok, detail):
    ACCEPTANCE.append((number, bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section('acceptance criteria')
    for number, ok, detail in sorted(ACCEPTANCE):
        status = 'PASS' if ok else 'FAIL'
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
