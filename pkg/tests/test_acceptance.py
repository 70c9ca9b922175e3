"""Acceptance criteria A1-A16, one pass/fail line per criterion.

Each criterion runs at its stated tolerance via the shared registry; the
CLI `verify` command executes the same checks.

Known defect, left failing on purpose: A4 asserts multiplicity E - 1 for
equilateral mandarins, but the eigenspace at k = pi E also contains the
symmetric mode cos(pi E x) on every edge (a mandarin has two distinct
endpoints, so the +-A values match up, unlike on a flower), giving true
multiplicity E for E in {2, 3, 4}.  The criterion is implemented exactly
as stated rather than weakened.
"""

import pytest

from qgraph.verify import CRITERIA, run_criterion


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name):
    result = run_criterion(name, seed=0)
    status = "PASS" if result.passed else "FAIL"
    print(f"{result.name} {status} ({result.seconds:.1f}s) {result.summary}")
    assert result.passed, "\n".join([result.summary] + result.details)


def test_every_criterion_is_fast():
    # spec budget: each criterion under ten seconds
    for name in ("A1", "A2", "A3", "A4", "CAT"):
        result = run_criterion(name, seed=0)
        assert result.seconds < 10.0
