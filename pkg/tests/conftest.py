import sys
from pathlib import Path

import pytest

from relbelief.model import DataSummary, Hyperparameters, Variant

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"

# (data, mu1, reference hyperparameters) for the three worked examples
WORKED_CASES = {
    "dental": (DataSummary.from_sd(15, 10.7, 3.6), 11.0, Hyperparameters(12.5, 0.83, 1.29, 12.36, Variant.UNKNOWN)),
    "walking": (DataSummary.from_sd(18, 12.9, 0.8), 12.5, Hyperparameters(16.0, 0.8, 4.01, 329.78, Variant.UNKNOWN)),
    "sugar": (DataSummary.from_sd(50, 4.6, 0.7), 5.0, Hyperparameters(5.0, 0.2, 4.0077, 20.6106, Variant.UNKNOWN)),
}


@pytest.fixture(params=sorted(WORKED_CASES))
def worked_case(request):
    return (request.param, *WORKED_CASES[request.param])


@pytest.fixture
def dental():
    return WORKED_CASES["dental"]


@pytest.fixture
def fixture_dir():
    return FIXTURE_DIR


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(acceptance.RESULTS):
        terminalreporter.write_line(acceptance.summary_line(criterion))
