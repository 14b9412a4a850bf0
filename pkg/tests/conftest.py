import re

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_CRITERIA: dict[str, list[str]] = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not match:
        return
    if report.when == "call" or report.outcome != "passed":
        _CRITERIA.setdefault(match.group(1), []).append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=int):
        status = "PASS" if all(o == "passed" for o in _CRITERIA[key]) else "FAIL"
        terminalreporter.write_line(f"criterion {int(key):2d}: {status}")
