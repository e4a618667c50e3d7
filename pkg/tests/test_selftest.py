import math

import pytest

from hilfer_impulse.selftest import SUITES, CaseResult, SuiteResult, run_suites


@pytest.fixture(scope="module")
def default_run():
    return run_suites()


def test_default_run_passes(default_run):
    assert [result.suite for result in default_run] == list(SUITES)
    for result in default_run:
        assert result.passed, result.worst


def test_closed_form_cases(default_run):
    closed_form = default_run[0]
    names = [case.name for case in closed_form.cases]
    # Derivatives are only checked where the power is at least lam
    assert "D mu=0.3 nu=1 delta=0.7" not in names
    assert "I mu=0.3 nu=1 delta=0.7" in names
    assert "D mu=0.4 nu=0.5 delta=0.7" in names
    assert all(case.refined_error is not None for case in closed_form.cases)


def test_coarse_grid_still_reports():
    (result,) = run_suites(["closed_form"], points=8)
    assert len(result.cases) == len(run_suites(["closed_form"], points=16)[0].cases)
    assert all(math.isfinite(case.error) for case in result.cases)
    assert result.worst in result.cases


def test_suite_result():
    good = CaseResult("good", 1e-4, 1e-3)
    bad = CaseResult("bad", 2e-3, 1e-3, refined_error=5e-4)
    assert good.passed
    assert not bad.passed
    result = SuiteResult("demo", (good, bad))
    assert not result.passed
    assert result.worst == bad
