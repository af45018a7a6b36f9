"""One test per acceptance criterion; each prints a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -s`` to see the lines.  The full set
takes a minute or two on one core.
"""

import pytest

from smale_ipd.suite import CRITERIA


@pytest.mark.parametrize("criterion", CRITERIA, ids=[fn.__name__ for fn in CRITERIA])
def test_criterion(criterion, capsys):
    res = criterion()
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()
