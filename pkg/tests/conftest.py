import pytest

import corpus


@pytest.fixture(scope="session")
def worked_abox():
    return corpus.load(corpus.WORKED_EXAMPLE)


@pytest.fixture(scope="session")
def worked_decision(worked_abox):
    return corpus.decision(worked_abox)


def pytest_terminal_summary(terminalreporter):
    if not corpus.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(corpus.RESULTS):
        ok, detail = corpus.RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
