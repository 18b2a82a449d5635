import random

import pytest

from otgroups import euclidean_integers, euclidean_line


@pytest.fixture
def Z():
    return euclidean_integers()


@pytest.fixture
def line3():
    return euclidean_line([0, 1, 2])


@pytest.fixture
def rng():
    return random.Random(20261016)


# -- acceptance summary: one line per criterion ------------------------------

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    number, title = marker.args
    passed = call.excinfo is None
    _criteria[number] = (title, passed, getattr(item, "criterion_note", ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, passed, note = _criteria[number]
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {number}. {title}" + (f"  ({note})" if note else ""))
