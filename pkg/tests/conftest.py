import random

import pytest
from hypothesis import strategies as st

from iocogames import fixture_path
from iocogames.conformance import angelic_complete
from iocogames.generators import random_sa
from iocogames.sa_core import load_sa_file
from iocogames.testgen import load_testcase_file


@pytest.fixture(scope="session")
def printer():
    return load_sa_file(fixture_path("printer.sa"))


@pytest.fixture(scope="session")
def mp3():
    return load_sa_file(fixture_path("mp3.sa"))


@pytest.fixture(scope="session")
def mutant():
    return load_sa_file(fixture_path("printer_mutant.sa"))


@pytest.fixture(scope="session")
def conforming(printer):
    return angelic_complete(printer)


@pytest.fixture(scope="session")
def probe():
    return load_testcase_file(fixture_path("printer_probe.tc"))


@pytest.fixture(scope="session")
def probe_oe():
    return load_testcase_file(fixture_path("printer_probe_oe.tc"))


def sa_from_seed(seed, max_states=4, n_inputs=2, n_outputs=2):
    return random_sa(random.Random(seed), max_states, n_inputs, n_outputs)


# hypothesis draws seeds; the generator turns them into automata
small_sas = st.integers(min_value=0, max_value=10**6).map(sa_from_seed)


# acceptance reporting: one line per criterion, whatever the capture mode

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, label): acceptance criterion n")


def pytest_runtest_makereport(item, call):
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, label = mark.args
    entry = _CRITERIA.setdefault(n, [label, True])
    if call.excinfo is not None and not call.excinfo.errisinstance(pytest.skip.Exception):
        entry[1] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        label, ok = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {label}")
