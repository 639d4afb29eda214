"""One test per acceptance criterion, each at its stated tolerance.

Each test also records a PASS/FAIL line that is printed in the terminal
summary.
"""

import json
import time

import pytest

from gibbsiqp import checks

from conftest import ACCEPTANCE_LINES


@pytest.mark.parametrize("number", [
    pytest.param(k, marks=pytest.mark.slow) if checks.ACCEPTANCE[k] in checks.SLOW else k
    for k in sorted(checks.ACCEPTANCE)])
def test_criterion(number):
    name = checks.ACCEPTANCE[number]
    t0 = time.perf_counter()
    res = checks.REGISTRY[name]()
    elapsed = time.perf_counter() - t0
    summary = json.dumps(checks._plain(res.metrics), sort_keys=True)
    line = "criterion %02d %s  %s  (%.1fs) %s" % (
        number, "PASS" if res.passed else "FAIL", name, elapsed, summary)
    if res.detail:
        line += "  [%s]" % res.detail
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert res.passed, line
