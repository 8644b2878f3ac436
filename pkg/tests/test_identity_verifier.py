import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from kepler2d.errors import DomainError, QuadratureError
from kepler2d.identity_verifier import (
    ScaledVariables,
    closed_form_rhs,
    scan_report,
    summarize,
    verify_new_integral,
    verify_origin_limit,
    verify_parity,
    verify_phase_form,
)


def test_scaled_variables():
    v = ScaledVariables.from_physical(0.5, 3.0, 1.0)
    assert (v.x, v.y) == (1.5, 4.0)
    with pytest.raises(DomainError):
        ScaledVariables(-1.0)


def test_known_case():
    r = verify_new_integral(0, 0, 1.0, tol=1e-10)
    assert r.passed
    assert abs(r.lhs - 2 / math.e) < 1e-10
    assert_allclose(r.rhs, 0.7357588823428847, rtol=1e-15)


def test_laguerre_zero_case():
    r = verify_new_integral(1, 0, 0.5)
    assert r.rhs == 0.0 and r.passed and abs(r.lhs) < 1e-8


def test_odd_m_case_sign():
    r = verify_new_integral(1, 1, 1.0)
    assert_allclose(r.rhs, -4 / (3 * math.e), rtol=1e-15)
    assert r.passed and r.lhs < 0


def test_closed_form_small_x_sign_alternates():
    for n in range(9):
        for m in range(n + 1):
            assert np.sign(closed_form_rhs(n, m, 1e-3)) == (-1) ** n


@given(n=st.integers(0, 6), data=st.data(), x=st.floats(0.05, 15.0))
@settings(max_examples=25, deadline=None)
def test_relation_holds_for_random_x(n, data, x):
    m = data.draw(st.integers(0, n))
    r = verify_new_integral(n, m, x, 1e-8)
    assert r.passed
    assert isinstance(r.lhs, float)   # real for m >= 0


def test_phase_form_examples():
    a = verify_phase_form(1, -1, 1.0)
    b = verify_phase_form(1, 1, 1.0)
    assert a.passed and b.passed
    assert a.rhs == b.rhs
    assert_allclose(verify_phase_form(0, 0, 2.0).rhs, 2 * math.exp(-2), rtol=1e-15)
    r = verify_phase_form(2, 1, 1.0)
    assert r.passed and abs(complex(r.lhs).imag) < 1e-8


@pytest.mark.parametrize("n,m", [(1, -1), (3, -1), (3, -3), (4, -3)])
def test_phase_form_sign_sensitivity(n, m):
    assert verify_phase_form(n, m, 0.7).passed
    assert not verify_phase_form(n, m, 0.7, phase=1j ** abs(m)).passed


def test_parity_examples():
    assert verify_parity(1, 0, [1.0]).lhs == 0.0
    r = verify_parity(2, 0, [3.0])
    assert r.passed and r.lhs == r.rhs
    y = np.random.default_rng(3).uniform(0.01, 50.0, 100)
    assert verify_parity(3, 2, y).abs_error < 1e-12


def test_origin_limit():
    r = verify_origin_limit(0)
    assert abs(r.lhs - 2.0) < 1e-13
    for n in range(1, 8):
        assert verify_origin_limit(n).passed


def test_unreachable_tolerance_raises_with_partial_report():
    with pytest.raises(QuadratureError) as info:
        verify_new_integral(2, 1, 1.0, tol=1e-16)
    partial = info.value.result
    assert not partial.passed
    assert "failure" in partial.params
    assert abs(partial.lhs - partial.rhs) < 1e-12


def test_scan_small():
    reports = scan_report(0, [1.0])
    assert len(reports) == 1 and reports[0].passed
    assert_allclose(reports[0].rhs, 2 / math.e, rtol=1e-15)


def test_scan_records_failures_and_continues():
    reports = scan_report(1, [0.5, 2.0], tol=1e-16)
    assert len(reports) == 6
    s = summarize(reports)
    assert s.n_passed < s.total and not s.passed


def test_scan_preconditions():
    with pytest.raises(DomainError):
        scan_report(2, [])
    with pytest.raises(DomainError):
        scan_report(-1, [1.0])
    with pytest.raises(DomainError):
        scan_report(13, [1.0])
    with pytest.raises(DomainError):
        verify_new_integral(1, 1, 0.0)
    with pytest.raises(DomainError):
        verify_new_integral(1, 2, 1.0)


def test_scan_order_is_deterministic():
    reports = scan_report(2, [2.0, 0.5])
    keys = [(r.params["n"], r.params["m"], r.params["x"]) for r in reports]
    assert keys == [(n, m, x) for n in range(3) for m in range(n + 1) for x in (2.0, 0.5)]
