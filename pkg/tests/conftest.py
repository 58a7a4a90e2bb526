def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    report = getattr(mod, "REPORT", None)
    if report:
        terminalreporter.section("acceptance criteria")
        for key in sorted(report, key=lambda k: (int(str(k).rstrip("h")), str(k))):
            terminalreporter.write_line(report[key])
