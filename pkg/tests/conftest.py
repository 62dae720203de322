"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if report.when == "call" or (report.when == "setup" and not report.passed):
        details = [str(v) for k, v in item.user_properties if k == "detail"]
        _RESULTS[number] = {
            "title": title,
            "outcome": "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL"),
            "seconds": report.duration,
            "detail": "; ".join(details),
        }


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        r = _RESULTS[number]
        line = f"criterion {number:>2}: {r['outcome']}  {r['title']}  ({r['seconds']:.1f}s)"
        terminalreporter.write_line(line)
        if r["detail"]:
            terminalreporter.write_line(f"              {r['detail']}")
