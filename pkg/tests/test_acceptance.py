"""Release acceptance gate: every criterion at its pinned tolerance.

One test per criterion; each prints its pass/fail line.  Criterion 8 is
expected to fail on one sub-clause (the scenario-I 2->4 core-doubling
ratio at delta=1000); the latency floor of the simulated system caps the
second doubling at ~1.53, below the required [1.7, 2.1].  See the
criterion's detail output: every other sub-clause passes.  The check is
implemented exactly as specified and deliberately not relaxed.
"""

import time

import pytest

from setrecon.acceptance import CRITERIA

_BUDGET_SECONDS = {1: 1, 2: 10, 3: 120, 4: 60, 5: 60, 6: 120, 7: 300, 8: 300, 9: 60}


@pytest.mark.parametrize("number,name,fn", CRITERIA, ids=[f"criterion_{n}" for n, _, _ in CRITERIA])
def test_acceptance_criterion(number, name, fn):
    start = time.perf_counter()
    passed, detail = fn()
    elapsed = time.perf_counter() - start
    status = "PASS" if passed else "FAIL"
    print(f"criterion {number} [{status}] {name}: {detail} ({elapsed:.1f}s)")
    assert elapsed <= _BUDGET_SECONDS[number], f"criterion {number} exceeded time budget"
    assert passed, f"criterion {number} ({name}): {detail}"
