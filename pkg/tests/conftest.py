import pytest

_ACCEPTANCE: list[tuple[str, bool, str]] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance line: call with the criterion label and a detail string."""
    state = {}

    def record(label: str, detail: str = ""):
        state["label"] = label
        state["detail"] = detail

    yield record
    if "label" in state:
        rep = getattr(request.node, "rep_call", None)
        passed = rep is not None and rep.passed
        _ACCEPTANCE.append((state["label"], passed, state["detail"]))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}  {detail}")
