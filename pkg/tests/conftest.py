import pytest

# filled by tests/test_acceptance.py: criterion id -> (passed, detail)
ACCEPTANCE = {}


@pytest.fixture
def record_criterion():
    def record(cid, passed, detail=""):
        ACCEPTANCE[cid] = (bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: (len(c), c)):
        passed, detail = ACCEPTANCE[cid]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] criterion {cid}: {detail}")
