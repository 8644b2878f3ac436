import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import special

from kepler2d.errors import DomainError
from kepler2d.quadrature import sphere_grid
from kepler2d.specfun import (
    assoc_laguerre,
    assoc_legendre,
    bessel_j,
    bessel_j_orders,
    factorial_ratio,
    phase_factor,
    spherical_harmonic,
)


def _ferrers_oracle(n, m, x):
    """(-1)^m (1-x^2)^(m/2) d^m P_n/dx^m from numpy's Legendre series."""
    p = np.polynomial.legendre.Legendre.basis(n).deriv(m)
    return (-1) ** m * (1 - x * x) ** (m / 2) * p(x)


def _bessel_series(m, x, terms=60):
    return sum((-1) ** k * (x / 2) ** (2 * k + m) / (math.factorial(k) * math.factorial(k + m))
               for k in range(terms))


class TestLegendre:
    def test_examples(self):
        assert assoc_legendre(0, 0, 0.3) == 1.0
        assert assoc_legendre(2, 0, 0.0) == -0.5
        # Ferrers sign: P_1^1(x) = -(1 - x^2)^(1/2).
        assert assoc_legendre(1, 1, 0.0) == -1.0

    @pytest.mark.parametrize("n", range(0, 11))
    def test_against_series_oracle(self, n):
        x = np.linspace(-0.99, 0.99, 41)
        for m in range(n + 1):
            ref = _ferrers_oracle(n, m, x)
            assert_allclose(assoc_legendre(n, m, x), ref, rtol=0, atol=1e-13 * max(1.0, np.max(np.abs(ref))))

    def test_matches_scipy_lpmv(self):
        x = np.linspace(-1, 1, 17)
        for n in range(9):
            for m in range(n + 1):
                assert_allclose(assoc_legendre(n, m, x), special.lpmv(m, n, x), rtol=1e-12, atol=1e-13)

    @given(n=st.integers(0, 10), data=st.data(), x=st.floats(-0.999, 0.999))
    @settings(max_examples=200, deadline=None)
    def test_parity(self, n, data, x):
        m = data.draw(st.integers(0, n))
        a = assoc_legendre(n, m, -x)
        b = (-1) ** (n + m) * assoc_legendre(n, m, x)
        assert abs(a - b) <= 1e-12 * max(1.0, abs(b))

    def test_array_shape(self):
        out = assoc_legendre(3, 1, np.zeros((2, 3)))
        assert out.shape == (2, 3)

    @pytest.mark.parametrize("args", [(1, 0, 1.5), (1, 2, 0.0), (-1, 0, 0.0), (2, -1, 0.0)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            assoc_legendre(*args)


class TestLaguerre:
    def test_examples(self):
        assert assoc_laguerre(0, 5, 3.7) == 1.0
        assert assoc_laguerre(1, 0, 0.5) == 0.5
        assert assoc_laguerre(1, 2, 1.0) == 2.0

    def test_value_at_zero_is_binomial(self):
        for k in range(11):
            for alpha in range(11):
                assert assoc_laguerre(k, alpha, 0.0) == math.comb(k + alpha, k)

    def test_explicit_sum(self):
        # Exact rational reference at integer x.
        xs = range(0, 31)
        for k in range(9):
            for alpha in range(0, 17, 2):
                ref = [float(sum(Fraction((-1) ** i * math.comb(k + alpha, k - i) * x ** i, math.factorial(i))
                                 for i in range(k + 1))) for x in xs]
                got = assoc_laguerre(k, alpha, np.array(xs, dtype=float))
                scale = max(1.0, max(abs(r) for r in ref))
                assert_allclose(got, ref, rtol=1e-12, atol=1e-14 * scale)

    def test_matches_scipy(self):
        x = np.linspace(0, 20, 41)
        for k in range(12):
            assert_allclose(assoc_laguerre(k, 3, x), special.eval_genlaguerre(k, 3, x), rtol=1e-11, atol=1e-11)

    @pytest.mark.parametrize("args", [(-1, 0, 1.0), (1, -2, 1.0), (1, 0, -0.5)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            assoc_laguerre(*args)


class TestBessel:
    def test_examples(self):
        assert bessel_j(0, 0.0) == 1.0
        assert bessel_j(3, 0.0) == 0.0

    def test_first_zero_of_j0(self):
        # Bisection on the power series, independent of the implementation.
        lo, hi = 2.0, 3.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if _bessel_series(0, lo) * _bessel_series(0, mid) <= 0:
                hi = mid
            else:
                lo = mid
        root = 0.5 * (lo + hi)
        assert abs(root - 2.404825557695773) < 1e-13
        assert abs(bessel_j(0, 2.404825557695773)) < 1e-12

    def test_against_series_small_x(self):
        for m in range(9):
            for x in (0.1, 0.9, 1.5, 4.0, 8.0):
                assert abs(bessel_j(m, x) - _bessel_series(m, x)) < 1e-13

    def test_against_scipy(self):
        x = np.concatenate([np.linspace(0, 50, 201), [100.0, 400.0, 1000.0]])
        for m in range(13):
            assert_allclose(bessel_j(m, x), special.jv(m, x), rtol=0, atol=1e-13)

    def test_recurrence(self):
        x = np.linspace(0.5, 20, 200)
        for m in range(1, 9):
            r = bessel_j(m - 1, x) + bessel_j(m + 1, x) - 2 * m / x * bessel_j(m, x)
            assert np.max(np.abs(r)) < 1e-10

    def test_negative_order(self):
        x = np.linspace(0.1, 10, 11)
        for m in range(1, 6):
            assert_allclose(bessel_j(-m, x), (-1) ** m * bessel_j(m, x), rtol=0, atol=0)

    def test_orders_table(self):
        x = np.array([0.3, 7.0])
        table = bessel_j_orders([0, 2, 5], x)
        for row, m in zip(table, [0, 2, 5]):
            assert_allclose(row, special.jv(m, x), atol=1e-14)

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_j(0, -1.0)


class TestSphericalHarmonics:
    def test_examples(self):
        assert_allclose(spherical_harmonic(0, 0, 1.1, 2.2), 1 / math.sqrt(4 * math.pi), rtol=1e-15)
        assert_allclose(spherical_harmonic(1, 0, 0.0, 0.0), math.sqrt(3 / (4 * math.pi)), rtol=1e-15)
        # (-i) from the phase factor times P_1^1(0) = -1.
        assert_allclose(spherical_harmonic(1, 1, math.pi / 2, 0.0), 1j * math.sqrt(3 / (8 * math.pi)),
                        rtol=1e-15)

    def test_orthonormal(self):
        grid = sphere_grid(8)
        labels = [(l, m) for l in range(7) for m in range(-l, l + 1)]
        ys = np.array([spherical_harmonic(l, m, grid.theta, grid.phi) for l, m in labels])
        gram = (ys * grid.weights) @ ys.conj().T
        assert np.max(np.abs(gram - np.eye(len(labels)))) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            spherical_harmonic(1, 2, 0.0, 0.0)


class TestPhaseAndRatios:
    def test_phase_examples(self):
        assert phase_factor(0) == 1
        assert phase_factor(1) == -1j
        assert phase_factor(-2) == -1

    @given(st.integers(-200, 200))
    def test_phase_is_four_periodic_unit(self, m):
        c = phase_factor(m)
        assert c == phase_factor(abs(m) + 4) == phase_factor(-m)
        assert c in (1, -1j, -1, 1j)
        assert c == [1, -1j, -1, 1j][abs(m) % 4]

    def test_factorial_ratio(self):
        assert factorial_ratio(3, 2) == 1 / 120
        assert factorial_ratio(5, -1) == factorial_ratio(5, 1) == 1 / 30
        assert_allclose(factorial_ratio(40, 10), math.factorial(30) / math.factorial(50), rtol=1e-12)
