"""Prints one PASS/FAIL line per acceptance criterion at the end of the run."""

_results = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or report.failed:
        key = props["criterion"]
        earlier_ok = _results.get(key, (True, ""))[0]
        _results[key] = (earlier_ok and report.passed, props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_results, key=lambda k: int(k.split(".")[0])):
        ok, detail = _results[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {key}  {detail}")
