"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_acceptance = []


def pytest_runtest_logreport(report):
    if "acceptance" not in report.keywords:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _acceptance.append(report)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for report in _acceptance:
        props = dict(report.user_properties)
        verdict = "PASS" if report.passed else "FAIL"
        name = props.get("criterion", report.nodeid.rsplit("::", 1)[-1])
        terminalreporter.write_line(f"{verdict}  {name}  {props.get('detail', '')}".rstrip())
