"""One test per acceptance criterion at its stated tolerance.

Each test prints its ``[PASS]``/``[FAIL]`` line immediately and again in the
session summary. Nothing is relaxed here: a criterion that does not hold
fails its test.
"""
import pytest

from chanshort import acceptance as acc


def _check(capsys, record_criterion, fn):
    res = record_criterion(fn())
    with capsys.disabled():
        print("\n" + res.line())
    assert res.passed, res.line()


def test_criterion_01_gradient_oracle(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_gradient)


def test_criterion_02_closed_form_consistency(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_consistency)


def test_criterion_03_rate_inequalities(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_rate_inequalities)


def test_criterion_04_ubm_stationarity(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_ubm_stationarity)


def test_criterion_05_brute_force_oracle(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_brute_force)


def test_criterion_06_fom_convergence(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_fom_convergence)


@pytest.mark.slow
def test_criterion_07_delay_gain(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_delay_gain)


@pytest.mark.slow
def test_criterion_08_sigma_experiment(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_sigma_experiment)


@pytest.mark.slow
def test_criterion_09_mi_crossover(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_mi_crossover)


def test_criterion_10_min_phase_invariance(capsys, record_criterion):
    _check(capsys, record_criterion, acc.check_min_phase_invariance)
