"""Acceptance battery: every criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run pytest with -s to see them all
inline; the same battery backs `maser-ldp validate`).
"""

import pytest

from maser_ldp.validation import CHECKS, run_check


@pytest.mark.parametrize("index,name", [(i, n) for i, n, _ in CHECKS],
                         ids=[f"{i:02d}-{n.replace(' ', '-')}" for i, n, _ in CHECKS])
def test_criterion(index, name):
    result = run_check(index)
    status = "PASS" if result.passed else "FAIL"
    print(f"criterion {index:2d} [{status}] {name}: {result.detail}")
    assert result.passed, f"criterion {index} ({name}): {result.detail}"
