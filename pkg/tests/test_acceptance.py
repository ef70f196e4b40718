"""Shipped guarantees, one pass/fail line per check; see isarpose.acceptance."""

import pytest

from isarpose.acceptance import all_checks

_CHECKS = all_checks()


@pytest.mark.parametrize("name,check", _CHECKS,
                         ids=[name for name, _ in _CHECKS])
def test_acceptance(name, check):
    passed, detail = check()
    assert passed, detail
