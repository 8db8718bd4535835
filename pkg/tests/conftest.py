"""Collects per-criterion outcomes from tests marked ``criterion(n)`` and prints a verdict line for each."""

from collections import defaultdict

import pytest

_RESULTS: dict[int, list[tuple[str, str]]] = defaultdict(list)
_TITLES = {
    1: "calibrated QBER / net-bit-rate envelope",
    2: "aggregate-mu projection (exact 1/8 sifted ratio, higher QBER)",
    3: "eavesdropper exposure arithmetic",
    4: "Monte Carlo vs analytic oracle",
    5: "B92 correctness",
    6: "Cascade reconciliation",
    7: "Toeplitz extractor properties",
    8: "byte-identical CSV determinism",
}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if hasattr(report, "wasxfail"):
            verdict = "FAIL" if report.outcome == "skipped" else "PASS"
        else:
            verdict = "PASS" if report.outcome == "passed" else "FAIL"
        _RESULTS[marker.args[0]].append((item.name, verdict))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        entries = _RESULTS[n]
        verdict = "PASS" if all(v == "PASS" for _, v in entries) else "FAIL"
        failing = [name for name, v in entries if v != "PASS"]
        detail = f" (failing: {', '.join(failing)})" if failing else ""
        terminalreporter.write_line(f"criterion {n}: {verdict} - {_TITLES.get(n, '')}{detail}")
