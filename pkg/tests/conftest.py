from __future__ import annotations

_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion implemented by a test")


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            item.user_properties.append(("criterion", mark.args))


def pytest_runtest_logreport(report):
    marks = dict(report.user_properties).get("criterion")
    if marks is None or not (report.when == "call" or report.failed or report.skipped):
        return
    number, title = marks
    status = "FAIL" if report.failed else ("SKIP" if report.skipped else "PASS")
    out = "".join(text for name, text in report.sections if "stdout" in name).strip()
    _RESULTS[number] = (status, title, out.splitlines()[-1] if out else "")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        status, title, detail = _RESULTS[number]
        line = f"criterion {number:2d} {status}: {title}"
        terminalreporter.write_line(f"{line}  [{detail}]" if detail else line)
