"""Acceptance gate: every quantitative claim, one test per criterion.

Each test runs the corresponding named check from systolab.verify at its
stated tolerance and prints a single PASS/FAIL line with the measured
quantities. Run with -s (or read captured output on failure) to see the
lines.
"""

import pytest

from systolab import verify

_IDS = [f"{number:02d}-{name}" for number, name in verify.CRITERIA]


@pytest.mark.parametrize(
    "number", [number for number, _ in verify.CRITERIA], ids=_IDS
)
def test_criterion(number):
    result = verify.run_criterion(number)
    print(result.line)
    assert result.passed, result.line
