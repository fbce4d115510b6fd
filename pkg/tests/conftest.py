import pytest

from pathlib import Path

from wntags.corpus import load_corpus
from wntags.taxonomy import load_taxonomy

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = FIXTURES / "golden"

# criterion name -> PASS/FAIL, in execution order
_criteria: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "criterion(name): acceptance criterion verified by this test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    name = marker.args[0]
    if report.when == "call":
        if _criteria.get(name) != "FAIL":
            _criteria[name] = "PASS" if report.passed else "FAIL"
    elif report.failed:  # setup or teardown error counts against the criterion
        _criteria[name] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, status in _criteria.items():
        terminalreporter.write_line(f"{status}  {name}")


@pytest.fixture(scope="session")
def fixture_taxonomy():
    return load_taxonomy(FIXTURES / "basic.tax")


@pytest.fixture()
def fixture_corpus():
    # function-scoped: tests mutate their own copy
    return load_corpus(FIXTURES / "corpus.jsonl")
