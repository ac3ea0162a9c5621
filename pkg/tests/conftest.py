"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""
import pytest

_RESULTS = {}  # nodeid -> {"label", "detail", "outcome"}


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        _RESULTS[item.nodeid] = {"label": marker.args[0], "detail": "", "outcome": "not run"}


def pytest_runtest_logreport(report):
    entry = _RESULTS.get(report.nodeid)
    if entry is None:
        return
    if report.when == "call" or report.outcome != "passed":
        entry["outcome"] = report.outcome


@pytest.fixture
def record(request):
    """Attach a short measurement summary to the current criterion."""
    entry = _RESULTS.get(request.node.nodeid)

    def note(text):
        if entry is not None:
            entry["detail"] = text

    return note


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for entry in _RESULTS.values():
        word = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(entry["outcome"], "NOT RUN")
        line = f"{word:7s} {entry['label']}"
        if entry["detail"]:
            line += f"  [{entry['detail']}]"
        terminalreporter.write_line(line)
