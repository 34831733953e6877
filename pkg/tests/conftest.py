import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from powerprint import PowerSignal  # noqa: E402

ACCEPTANCE_RESULTS = []


def record_acceptance(number, title, passed, detail=""):
    ACCEPTANCE_RESULTS.append((number, title, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}" + (f" -- {detail}" if detail else ""))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def ramp_patch():
    return np.array([[0.1, 0.2, 0.3], [0.4, 0.5, 0.6], [0.7, 0.8, 0.9]])


def make_signal(values, label=None, source_id="s"):
    return PowerSignal(np.asarray(values, dtype=float), label=label, source_id=source_id)
