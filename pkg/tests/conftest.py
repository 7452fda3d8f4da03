import pytest

_ACCEPTANCE: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.fixture
def ac_record(request):
    """Collects the measured figures of an acceptance test for the summary table."""
    marker = request.node.get_closest_marker("criterion")
    entry = _ACCEPTANCE.setdefault(marker.args[0], {"title": marker.args[1], "details": [], "outcome": None})

    def record(text: str) -> None:
        entry["details"].append(text)

    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call" and not report.failed:
        return
    entry = _ACCEPTANCE.setdefault(marker.args[0], {"title": marker.args[1], "details": [], "outcome": None})
    if report.failed:
        entry["outcome"] = "FAIL"
    elif report.when == "call" and entry["outcome"] is None:
        entry["outcome"] = "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        tr.write_line(f"[{entry['outcome'] or 'SKIP'}] criterion {number}: {entry['title']}")
        for line in entry["details"]:
            tr.write_line(f"         {line}")
