import pytest

from qdsbench.app.core.checks import CHECKS, run_checks, verify_check
from qdsbench.app.core.errors import UnknownCheckError


@pytest.mark.parametrize("name", ["pauli", "costmatrix", "b92"])
def test_exact_checks_pass(name):
    report = verify_check(name)
    assert report.name == name
    assert report.passed, report.detail


def test_cmin_reports_one_eighth():
    report = verify_check("cmin")
    assert report.passed, report.detail
    assert abs(report.value - 0.125) <= 1e-12


def test_cmax_reports_three_eighths():
    report = verify_check("cmax")
    assert report.passed, report.detail
    assert abs(report.value - 0.375) <= 1e-12


def test_b92_value_is_both_wrong_probability():
    assert verify_check("b92").value <= 1e-12


def test_run_all_checks():
    reports = run_checks(["all"])
    assert [r.name for r in reports] == list(CHECKS)
    assert all(r.passed for r in reports)


def test_unknown_check():
    with pytest.raises(UnknownCheckError):
        verify_check("cmid")
    with pytest.raises(ValueError):
        run_checks(["pauli", "nope"])
