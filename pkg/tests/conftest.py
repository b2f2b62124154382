import time
from contextlib import contextmanager

import pytest

_RESULTS: dict[int, tuple[str, str, float | None, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title, limit): acceptance criterion with a runtime limit in s")


@pytest.fixture
def budget(request):
    """Time the enclosed block and fail if it exceeds the criterion's runtime limit."""
    marker = request.node.get_closest_marker("criterion")
    limit = marker.args[2]

    @contextmanager
    def timed():
        start = time.perf_counter()
        yield
        elapsed = time.perf_counter() - start
        request.node.user_properties.append(("elapsed", elapsed))
        assert elapsed < limit, f"took {elapsed:.2f} s, limit {limit} s"

    return timed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title, limit = marker.args
    failed = report.failed
    if report.when == "call" or failed:
        elapsed = dict(item.user_properties).get("elapsed")
        previous = _RESULTS.get(number)
        if previous is None or failed:
            _RESULTS[number] = (title, "FAIL" if failed else "PASS", elapsed, limit)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, status, elapsed, limit = _RESULTS[number]
        took = "n/a" if elapsed is None else f"{elapsed:.2f} s"
        terminalreporter.write_line(f"{status} criterion {number:2d}: {title} ({took}, limit {limit} s)")
