import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from uavfronthaul.special_math import bessel_i0, bessel_i0_scaled, marcum_q1

# High-precision reference values (40-digit Bessel/quadrature evaluation).
I0_AT_1 = 1.2660658777520083356
I0_AT_50 = 2.9325537838493363267e20
Q1_AT_1_1 = 0.73287980379682021825


class TestBesselI0:
    def test_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_series_value(self):
        assert bessel_i0(1.0) == pytest.approx(I0_AT_1, rel=1e-12)

    def test_asymptotic_value(self):
        assert bessel_i0(50.0) == pytest.approx(I0_AT_50, rel=1e-12)

    def test_even_symmetry(self):
        assert bessel_i0(-3.2) == bessel_i0(3.2)

    def test_against_mpmath_series_range(self):
        xs = np.linspace(0.0, 30.0, 61)
        for x in xs:
            ref = float(mp.besseli(0, mp.mpf(float(x))))
            assert bessel_i0(float(x)) == pytest.approx(ref, rel=1e-11)

    def test_branch_seam_agreement(self):
        for x in (14.999, 15.0, 15.001):
            ref = float(mp.besseli(0, mp.mpf(x)))
            assert bessel_i0(x) == pytest.approx(ref, rel=1e-11)

    def test_monotone(self):
        xs = np.linspace(0.0, 60.0, 200)
        vals = bessel_i0(xs)
        assert np.all(np.diff(vals) >= 0)

    def test_scaled_matches(self):
        for x in (0.5, 10.0, 80.0, 700.0):
            ref = float(mp.besseli(0, mp.mpf(x)) * mp.e ** (-mp.mpf(x)))
            assert bessel_i0_scaled(x) == pytest.approx(ref, rel=1e-11)

    def test_nonfinite_rejected(self):
        with pytest.raises(ValueError):
            bessel_i0(float("nan"))
        with pytest.raises(ValueError):
            bessel_i0(float("inf"))

    def test_vectorized(self):
        xs = np.array([0.0, 1.0, 50.0])
        out = bessel_i0(xs)
        assert out.shape == (3,)
        assert out[0] == 1.0


def _quad_q1(a: float, b: float) -> float:
    def integrand(t):
        return t * math.exp(-0.5 * ((t - a) ** 2)) * bessel_i0_scaled(a * t)

    val, _ = integrate.quad(integrand, b, a + 40.0, limit=300, epsabs=1e-13)
    return min(val, 1.0)


class TestMarcumQ1:
    def test_b_zero_is_one(self):
        for a in (0.0, 0.7, 3.0, 10.0):
            assert marcum_q1(a, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_a_zero_closed_form(self):
        for b in (0.1, 1.0, 2.5, 5.0):
            assert marcum_q1(0.0, b) == pytest.approx(
                math.exp(-0.5 * b * b), abs=1e-12)

    def test_one_one_quadrature_value(self):
        assert marcum_q1(1.0, 1.0) == pytest.approx(Q1_AT_1_1, abs=1e-12)

    def test_grid_against_quadrature(self):
        # acceptance-grade oracle: <= 1e-10 absolute on [0, 5]^2
        for a in np.linspace(0.0, 5.0, 11):
            for b in np.linspace(0.0, 5.0, 11):
                if b == 0.0:
                    continue
                assert marcum_q1(float(a), float(b)) == pytest.approx(
                    _quad_q1(float(a), float(b)), abs=1e-10)

    def test_complement_sums_to_one(self):
        # Q1(a, b) + integral over [0, b] of the defining integrand = 1
        for a in np.linspace(0.0, 5.0, 10):
            for b in np.linspace(0.1, 5.0, 10):
                def integrand(t, a=a):
                    return (t * math.exp(-0.5 * (t - a) ** 2)
                            * bessel_i0_scaled(a * t))
                low, _ = integrate.quad(integrand, 0.0, b, limit=300,
                                        epsabs=1e-12)
                assert marcum_q1(float(a), float(b)) + low == pytest.approx(
                    1.0, abs=1e-9)

    def test_large_argument_branch(self):
        # a^2/2 above the series limit exercises the quadrature fallback
        a = 40.0
        assert marcum_q1(a, a - 1.0) == pytest.approx(
            _quad_q1(a, a - 1.0), abs=1e-9)
        assert 0.0 <= marcum_q1(a, a + 5.0) <= 1.0

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            marcum_q1(-1.0, 1.0)
        with pytest.raises(ValueError):
            marcum_q1(1.0, float("nan"))

    def test_vectorized_broadcast(self):
        a = np.array([0.0, 1.0, 2.0])
        out = marcum_q1(a, 1.0)
        assert out.shape == (3,)
        assert out[0] == pytest.approx(math.exp(-0.5), abs=1e-12)

    @settings(max_examples=150, deadline=None)
    @given(a=st.floats(0.0, 8.0), b1=st.floats(0.0, 8.0), db=st.floats(0.0, 4.0))
    def test_monotone_properties(self, a, b1, db):
        q_low = marcum_q1(a, b1)
        q_high = marcum_q1(a, b1 + db)
        assert 0.0 <= q_high <= q_low + 1e-12 <= 1.0 + 1e-12
