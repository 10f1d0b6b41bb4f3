"""Acceptance gate: every criterion at its pinned tolerance, one pass/fail
line printed per criterion.

Criterion 5 contains the same-coordinate Wick-ratio clause, which is
implemented faithfully at the shipped configuration and is expected red:
the truncated fourth-power moment diverges with the truncation radius, so
no fixed truncation reproduces the pairing constant 3 stably (the measured
value at the shipped config is reported in the failure message).  See
docs in padicstoch.acceptance and the repository decisions record.
"""

import pytest

from padicstoch.acceptance import run_all

SEED = 7


@pytest.fixture(scope="module")
def results():
    res = run_all(SEED)
    print()
    for r in res:
        print(f"criterion {r.index:2d} {r.name:<14} {'PASS' if r.passed else 'FAIL'}")
        for check, value, tol, ok in r.rows:
            if not ok:
                print(f"    failed: {check} value={value!r} tolerance={tol!r}")
    return {r.index: r for r in res}


def _assert_criterion(results, idx):
    r = results[idx]
    failed = [(c, v, t) for c, v, t, ok in r.rows if not ok]
    assert r.passed, f"criterion {idx} ({r.name}) failed checks: {failed}"


def test_criterion_1_gamma(results):
    _assert_criterion(results, 1)


def test_criterion_2_fourier(results):
    _assert_criterion(results, 2)


def test_criterion_3_vladimirov(results):
    _assert_criterion(results, 3)


def test_criterion_4_heat(results):
    _assert_criterion(results, 4)


def test_criterion_5_qgaussian(results):
    _assert_criterion(results, 5)


def test_criterion_6_ito(results):
    _assert_criterion(results, 6)


def test_criterion_7_poisson_levy(results):
    _assert_criterion(results, 7)


def test_criterion_8_geodesic(results):
    _assert_criterion(results, 8)


def test_criterion_9_sde(results):
    _assert_criterion(results, 9)


def test_criterion_10_determinism(results):
    _assert_criterion(results, 10)
