"""Acceptance criteria at their stated tolerances and time budgets.

Each test prints one ``[PASS]``/``[FAIL]`` line. Run directly
(``python tests/test_acceptance.py``) for just the summary lines.
"""

import sys

import pytest

from lyness import ParameterCycle, adherence_intervals, iterate
from lyness.acceptance import CRITERIA, run_criterion


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA],
                         ids=[f"criterion_{c[0]:02d}_{c[4].__name__}" for c in CRITERIA])
def test_criterion(number, capsys):
    result = run_criterion(number)
    with capsys.disabled():
        print("\n" + result.line())
    assert result.passed, result.line()


def test_island_map_with_larger_perturbation_gives_seven_intervals():
    # documents where a seven-interval adherence set does occur: with the
    # perturbation 0.01 in place of 0.001 the start (14.8, 8.25) gives 7
    xs = iterate(ParameterCycle([2, 4, 7, 0.01]), (14.8, 8.25), 1_000_000, mode="log").values
    assert [adherence_intervals(xs, gap_factor=g).count for g in (10, 20, 50)] == [7, 7, 7]


if __name__ == "__main__":
    failed = 0
    for num, *_ in CRITERIA:
        r = run_criterion(num)
        print(r.line(), flush=True)
        failed += not r.passed
    sys.exit(1 if failed else 0)
