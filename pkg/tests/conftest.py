import os
from pathlib import Path

import numpy as np
import pytest

REPO_DATA = Path(__file__).resolve().parents[1] / "data"
os.environ.setdefault("RFFSGM_DATA_DIR", str(REPO_DATA))

_CRITERIA = []


@pytest.fixture
def report_criterion():
    """Record one acceptance line: call with (label, passed, detail)."""

    def record(label, passed, detail=""):
        _CRITERIA.append((label, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _CRITERIA:
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {label}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def data_dir():
    return Path(os.environ["RFFSGM_DATA_DIR"])
