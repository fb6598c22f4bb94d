import numpy as np
import pytest

from eulerlab.models import glued_counterexample, klein_mapping_torus

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    key = (mark.args[0], mark.args[1])
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    prev = _ACCEPTANCE.get(key, True)
    if rep.when == "call" or rep.failed:
        _ACCEPTANCE[key] = prev and not failed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (num, title), ok in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {num}. {title}")


@pytest.fixture(scope="session")
def klein():
    return klein_mapping_torus()


@pytest.fixture(scope="session")
def glued():
    return glued_counterexample()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
