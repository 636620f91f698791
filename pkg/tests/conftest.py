import pathlib
import sys

import pytest

sys.path.insert(0, str(pathlib.Path(__file__).parent))

_acceptance: dict[str, tuple[str, str]] = {}
_notes: dict[str, list[str]] = {}


@pytest.fixture
def note(request):
    """Attach a line of measured detail to the acceptance summary."""
    lines = _notes.setdefault(request.node.nodeid, [])
    return lines.append


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        doc = getattr(report, "criterion", report.nodeid.split("::")[-1])
        _acceptance[report.nodeid] = (doc, report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker:
        rep.criterion = f"criterion {marker.args[0]}: {marker.args[1]}"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for nodeid, (doc, outcome) in _acceptance.items():
        verdict = "PASS" if outcome == "passed" else "FAIL"
        tr.write_line(f"{verdict}  {doc}")
        for line in _notes.get(nodeid, []):
            tr.write_line(f"      {line}")
