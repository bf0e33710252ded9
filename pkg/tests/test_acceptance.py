"""Acceptance gate: every criterion at its stated tolerance.

Each test prints its pass/fail line so `pytest -v -s tests/test_acceptance.py`
doubles as the acceptance report; the CLI `selftest` subcommand runs the
same functions.
"""

import pytest

from polyspin import acceptance


@pytest.mark.parametrize("criterion", acceptance.ALL_CRITERIA, ids=lambda f: f.__name__)
def test_criterion(criterion):
    result = criterion()
    print(result.line())
    assert result.passed, result.line()
