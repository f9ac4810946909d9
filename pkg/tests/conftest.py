import os
import sys

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=100, deadline=None)
settings.load_profile("default")

dims = st.sampled_from([3, 5, 7, 9])


@st.composite
def error_states(draw, d=None):
    d = draw(dims) if d is None else d
    bits = draw(st.lists(st.integers(0, 1), min_size=2 * d * d, max_size=2 * d * d))
    return d, np.array(bits, dtype=np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(20201016)


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, passed: bool, detail: str, advisory: bool = False) -> None:
    status = "PASS" if passed else ("WARN" if advisory else "FAIL")
    line = f"criterion {criterion}: {status} - {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
