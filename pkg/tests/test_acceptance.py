"""Acceptance gate: one test per numbered criterion.

Each criterion prints its own pass/fail line (visible with `pytest -s` and
in the CLI selftest); tolerances are pinned inside gmono.acceptance.
"""

import pytest

from gmono import acceptance


@pytest.mark.parametrize(
    "name,fn", acceptance.CRITERIA, ids=[c[0].replace(" ", "_") for c in acceptance.CRITERIA]
)
def test_criterion(name, fn):
    ok, detail = fn()
    status = "PASS" if ok else "FAIL"
    print(f"[{status}] criterion {name}: {detail}")
    assert ok, f"criterion {name}: {detail}"


def test_selftest_runner_aggregates():
    lines = []
    assert acceptance.run_all(out=lines.append)
    assert len(lines) == len(acceptance.CRITERIA)
    assert all(line.startswith("[PASS]") for line in lines)
