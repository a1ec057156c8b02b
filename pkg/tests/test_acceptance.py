"""The fourteen acceptance criteria at their stated tolerances and time budgets."""
import pytest

from decolab.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("cid", sorted(CRITERIA), ids=lambda c: f"{c:02d}-{CRITERIA[c][0]}")
def test_criterion(cid, capsys):
    result = run_criterion(cid)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()
