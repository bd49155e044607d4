"""Acceptance suite: one test per criterion at full settings.

Each test prints a ``[PASS]``/``[FAIL]`` line for the criterion followed by
its individual checks; run ``pytest tests/test_acceptance.py -v -s`` to see
them. A criterion passes only if every check holds within its pinned
tolerance and the criterion finishes within its time budget.
"""
import pytest

from fracpoisson.validation import CRITERIA, run_criterion


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    res = run_criterion(number)
    print()
    print(res.summary_line())
    for c in res.checks:
        print(c.line())
    failed = [c.line() for c in res.checks if not c.passed]
    assert res.passed, f"criterion {number} failed: {failed or 'time budget exceeded'}"
