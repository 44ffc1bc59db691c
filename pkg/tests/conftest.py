import pytest

_OUTCOMES: list[tuple[int, str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    number, title = marker.args
    notes = [v for k, v in item.user_properties if k == "note"]
    soft = [v for k, v in item.user_properties if k == "warning"]
    status = "PASS" if report.passed else "FAIL"
    if report.passed and soft:
        status = "WARN"
    _OUTCOMES.append((number, title, status, "; ".join(notes + soft)))
    line = f"criterion {number} [{status}] {title}" + (f" ({_OUTCOMES[-1][3]})" if _OUTCOMES[-1][3] else "")
    report.sections.append(("acceptance", line))


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, status, detail in sorted(_OUTCOMES):
        suffix = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {number} [{status}] {title}{suffix}")
