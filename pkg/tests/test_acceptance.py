"""Acceptance gate: every criterion at its stated tolerance and full trial counts.

Each criterion prints one [PASS]/[FAIL] line with its measured values, also
when pytest captures output. The Monte Carlo agreement criterion runs 10^5
trials at five displacements and dominates the runtime (about a minute).
"""

import pytest

from d2dcache.validation import CRITERIA, Settings

SETTINGS = Settings()


@pytest.mark.slow
@pytest.mark.parametrize("key", list(CRITERIA))
def test_criterion(key, capsys):
    check = CRITERIA[key](SETTINGS)
    with capsys.disabled():
        print("\n" + check.line())
    assert check.passed, check.line()
