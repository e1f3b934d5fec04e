import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


CRITERIA_LINES = []


def record_criterion(number, name, ok, detail=""):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip()
    CRITERIA_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
