"""Collects acceptance results and prints one PASS/FAIL line per criterion."""

import pytest

_RESULTS: dict[str, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label, title): acceptance criterion this test decides")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    label, title = marker.args
    outcome = "PASS" if call.excinfo is None else "FAIL"
    measured = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    _RESULTS[label] = (outcome, title, measured)


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_RESULTS, key=lambda s: int(s[1:])):
        outcome, title, measured = _RESULTS[label]
        line = f"{outcome} {label} {title}"
        if measured:
            line += f"  [{measured}]"
        terminalreporter.write_line(line)


@pytest.fixture
def measure(record_property):
    """Record a measured quantity; it is echoed on the criterion's summary line."""

    def _measure(name, value):
        record_property(name, f"{value:.3g}" if isinstance(value, float) else value)

    return _measure
