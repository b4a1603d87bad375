import pytest

CRITERIA = {
    1: "k-Gamma identities",
    2: "Mittag-Leffler identities and branch overlap",
    3: "Bessel reductions",
    4: "first closed form vs Volterra oracle",
    5: "published/derived adjudication",
    6: "consistency lattice",
    7: "Laplace residual",
    8: "fractional-integral power rule and nu=1 oracles",
    9: "CLI determinism and golden files",
}

_outcomes: dict[int, list[tuple[str, str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    number = dict(report.user_properties).get("criterion")
    if number is None:
        return
    detail = dict(report.user_properties).get("detail", "")
    _outcomes.setdefault(number, []).append((report.nodeid, report.outcome, detail))


@pytest.fixture(autouse=True)
def _tag_criterion(request, record_property):
    marker = request.node.get_closest_marker("criterion")
    if marker is not None:
        record_property("criterion", marker.args[0])


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        runs = _outcomes.get(number)
        if not runs:
            continue
        ok = all(outcome == "passed" for _, outcome, _ in runs)
        passed = sum(outcome == "passed" for _, outcome, _ in runs)
        line = f"criterion {number} ({CRITERIA[number]}): {'PASS' if ok else 'FAIL'}" \
               f" [{passed}/{len(runs)} checks]"
        terminalreporter.write_line(line)
        for nodeid, outcome, detail in runs:
            if outcome != "passed" or detail:
                name = nodeid.split("::", 1)[-1]
                terminalreporter.write_line(f"    {outcome.upper():6} {name} {detail}".rstrip())
