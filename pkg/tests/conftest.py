"""Per-criterion pass/fail summary for tests marked ``acceptance(n)``."""
import pytest

CRITERIA = {
    1: "exact Krawtchouk identities",
    2: "Krawtchouk factorisation of the degree-zero function",
    3: "first-order equation of the degree-zero function",
    4: "classical pair certification",
    5: "shift chain",
    6: "Rodrigues formula and corollaries",
    7: "su2 commuting first-order operator",
    8: "scalar Jacobi gate",
    9: "negative controls",
    10: "sign of the deformed potential",
}

_outcomes: dict[int, list[tuple[str, bool]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(n): test belongs to acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _outcomes.setdefault(marker.args[0], []).append((item.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(CRITERIA):
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n:2d} NOT RUN  {CRITERIA[n]}")
            continue
        failed = [nodeid for nodeid, ok in results if not ok]
        status = "PASS" if not failed else "FAIL"
        tr.write_line(f"criterion {n:2d} {status:7s}  {CRITERIA[n]} "
                      f"({len(results) - len(failed)}/{len(results)} checks passed)")
