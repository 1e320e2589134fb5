"""Collects acceptance outcomes and prints one line per criterion."""
import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _RESULTS.setdefault(number, {"title": title, "status": "PASS", "detail": ""})
    if rep.skipped and entry["status"] == "PASS":
        entry["status"] = "SKIP"
        entry["detail"] = str(rep.longrepr[-1]) if isinstance(rep.longrepr, tuple) else ""
    elif rep.failed:
        entry["status"] = "FAIL"
        entry["detail"] = rep.longreprtext.strip().splitlines()[-1] if rep.longreprtext else ""


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        e = _RESULTS[number]
        line = f"criterion {number}: {e['status']}  {e['title']}"
        if e["detail"] and e["status"] != "PASS":
            line += f"  ({e['detail']})"
        terminalreporter.write_line(line)
