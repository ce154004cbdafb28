import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=200, deadline=None, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# ---------------------------------------------------------------- acceptance summary

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, text): acceptance criterion")


def pytest_runtest_logreport(report):
    marker = _criteria.get(report.nodeid)
    if marker is None:
        return
    if report.when == "call" or report.failed:
        prev = marker.get("passed", True)
        marker["passed"] = prev and report.passed
        if report.when == "call":
            marker["seconds"] = report.duration


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("criterion")
        if m is not None:
            _criteria[item.nodeid] = {"number": m.args[0], "text": m.args[1]}


def pytest_terminal_summary(terminalreporter):
    done = [c for c in _criteria.values() if "passed" in c]
    if not done:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(done, key=lambda c: c["number"]):
        status = "PASS" if c["passed"] else "FAIL"
        secs = c.get("seconds")
        timing = f" ({secs:.2f} s)" if secs is not None else ""
        terminalreporter.write_line(f"{status} criterion {c['number']}: {c['text']}{timing}")
