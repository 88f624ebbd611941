"""Every acceptance criterion at its stated tolerance and full sample size.

One ``[PASS]``/``[FAIL]`` line per criterion is printed in the terminal
summary (see conftest.py) and on stdout when run with ``-s``.
"""
import pytest

from schwarzmaps.acceptance import CRITERIA, run_criterion

RESULTS = {}


@pytest.mark.acceptance
@pytest.mark.parametrize("cid", sorted(CRITERIA))
def test_criterion(cid):
    res = run_criterion(cid, seed=0)
    RESULTS[cid] = res
    print(res.line())
    assert res.passed, res.detail
