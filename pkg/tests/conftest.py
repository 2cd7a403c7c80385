import pytest

# filled by tests/test_acceptance.py: criterion number -> (passed, line)
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k][1])


@pytest.fixture
def rng():
    import numpy as np
    return np.random.default_rng(12345)
