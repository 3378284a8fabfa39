import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from boundary_paths import build  # noqa: E402
from boundary_paths.fixtures import square_hole, triangle  # noqa: E402

import acceptance_log  # noqa: E402


@pytest.fixture(scope="session")
def sq():
    return square_hole()


@pytest.fixture(scope="session")
def tri():
    return triangle()


@pytest.fixture(scope="session")
def sq_qs(sq):
    return build(sq)


@pytest.fixture(scope="session")
def tri_qs(tri):
    return build(tri)


def pytest_terminal_summary(terminalreporter):
    lines = acceptance_log.lines()
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in lines:
        terminalreporter.write_line(line)
