"""The nine acceptance criteria, one test each.

Every test prints a single PASS/FAIL line to the terminal, whether or not
output capture is on.
"""

import pytest

from lahwalk.acceptance import CHECKS


@pytest.mark.parametrize("check", CHECKS, ids=[f"criterion_{i}" for i in range(1, len(CHECKS) + 1)])
def test_criterion(check, capsys):
    result = check()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.detail
