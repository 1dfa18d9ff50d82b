"""Collects acceptance-criterion outcomes and prints one line per criterion."""
import pytest

_RESULTS = {}


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            number, title = mark.args
            _RESULTS.setdefault(number, {"title": title, "outcomes": [], "details": []})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    entry = _RESULTS[mark.args[0]]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        entry["outcomes"].append(report.passed)
        entry["details"].extend(v for k, v in item.user_properties if k == "measured")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        entry = _RESULTS[number]
        if not entry["outcomes"]:
            status = "NOT RUN"
        else:
            status = "PASS" if all(entry["outcomes"]) else "FAIL"
        line = f"[{status}] criterion {number}: {entry['title']}"
        if entry["details"]:
            line += " | " + "; ".join(entry["details"])
        terminalreporter.write_line(line)
