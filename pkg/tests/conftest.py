import pytest

from regclear.harness import five_unit_case


@pytest.fixture
def five_gen():
    return five_unit_case()


@pytest.fixture
def five_gen_mismatched():
    return five_unit_case(forecast_demand=168.0)


_acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    label = getattr(item.function, "criterion", None)
    if label is None:
        return
    failed = report.failed or (call.when == "call" and report.skipped)
    if call.when == "call" or failed:
        prev = _acceptance.get(label)
        _acceptance[label] = "FAIL" if failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_acceptance, key=lambda s: int(s.split(".")[0])):
        terminalreporter.write_line(f"{_acceptance[label]}  {label}")
