import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose
from scipy import integrate

from localadd.kernels import KERNEL_NAMES, Kernel, boundary_kernel, get_kernel, kernel_eval, kernel_moment


class TestKernelValues:
    def test_epanechnikov_centre(self):
        assert kernel_eval("epanechnikov", 0.0) == pytest.approx(0.75)

    def test_epanechnikov_support_edge(self):
        assert kernel_eval("epanechnikov", 1.0) == 0.0

    def test_epanechnikov_symmetric_value(self):
        assert kernel_eval("epanechnikov", -0.5) == pytest.approx(0.5625)

    def test_zero_outside_support(self):
        for name in KERNEL_NAMES:
            assert_allclose(kernel_eval(name, [-1.5, 1.0001, 3.0]), 0.0)

    def test_aliases(self):
        assert get_kernel("tgauss").name == "truncated_gaussian"
        assert get_kernel("biweight").name == "quartic"
        with pytest.raises(ValueError):
            Kernel("cosine")

    @pytest.mark.parametrize("name", KERNEL_NAMES)
    def test_integrates_to_one(self, name):
        val, _ = integrate.quad(lambda u: float(kernel_eval(name, u)), -1, 1, epsabs=1e-14)
        assert abs(val - 1) < 1e-12

    @pytest.mark.parametrize("name", KERNEL_NAMES)
    @given(u=st.floats(-1.2, 1.2))
    def test_symmetric(self, name, u):
        assert kernel_eval(name, u) == pytest.approx(kernel_eval(name, -u), abs=1e-15)

    @pytest.mark.parametrize("name", KERNEL_NAMES)
    def test_cdf_matches_quadrature(self, name):
        k = get_kernel(name)
        for u in (-0.7, 0.0, 0.3, 1.0):
            val, _ = integrate.quad(lambda t: float(k(t)), -1, u, epsabs=1e-14)
            assert k.cdf(u) == pytest.approx(val, abs=1e-12)


class TestMoments:
    def test_epanechnikov_second_moment(self):
        assert kernel_moment("epanechnikov", 2, 1) == pytest.approx(0.2, abs=1e-15)

    def test_epanechnikov_squared_mass(self):
        assert kernel_moment("epanechnikov", 0, 2) == pytest.approx(0.6, abs=1e-15)

    def test_odd_moment(self):
        assert kernel_moment("epanechnikov", 1, 1) == 0.0

    def test_unsupported(self):
        with pytest.raises(ValueError):
            kernel_moment("epanechnikov", 5, 1)
        with pytest.raises(ValueError):
            kernel_moment("quartic", 2, 3)

    @pytest.mark.parametrize("name", KERNEL_NAMES)
    @pytest.mark.parametrize("j", range(5))
    @pytest.mark.parametrize("l", (1, 2))
    def test_against_quadrature(self, name, j, l):
        k = get_kernel(name)
        val, _ = integrate.quad(lambda u: u**j * float(k(u)) ** l, -1, 1, epsabs=1e-14, epsrel=1e-13)
        assert kernel_moment(name, j, l) == pytest.approx(val, abs=1e-12)


class TestPartialMoment:
    @pytest.mark.parametrize("name", KERNEL_NAMES)
    @pytest.mark.parametrize("j", range(3))
    def test_against_quadrature(self, name, j):
        k = get_kernel(name)
        for a, b in ((-1.0, 1.0), (-0.3, 1.0), (-1.0, 0.0), (0.2, 0.7), (-2.0, 0.4)):
            val, _ = integrate.quad(lambda u: u**j * float(k(u)), max(a, -1), min(b, 1), epsabs=1e-14)
            assert k.partial_moment(j, a, b) == pytest.approx(val, abs=1e-12)

    @pytest.mark.parametrize("name", KERNEL_NAMES)
    def test_full_range_matches_moment(self, name):
        k = get_kernel(name)
        for j in range(5):
            assert k.partial_moment(j, -1, 1) == pytest.approx(k.moment(j), abs=1e-12)

    def test_vectorized(self):
        k = get_kernel("tgauss")
        out = k.partial_moment(0, np.array([-1.0, 0.0]), np.array([1.0, 1.0]))
        assert_allclose(out, [1.0, 0.5], atol=1e-12)


class TestBoundaryKernel:
    def test_interior(self):
        assert boundary_kernel("epanechnikov", 0.1, 0.0, 0.0) == pytest.approx(7.5)

    def test_half_truncated(self):
        assert boundary_kernel("epanechnikov", 0.1, -1.0, -1.0) == pytest.approx(15.0)

    def test_partial_truncation_matches_quadrature(self):
        k = get_kernel("epanechnikov")
        h, v = 0.2, 0.9
        mass, _ = integrate.quad(lambda t: float(k((t - v) / h)) / h, -1, 1, points=[0.7, 1.0], epsabs=1e-14)
        expected = float(k((0.95 - v) / h)) / h / mass
        assert boundary_kernel(k, h, 0.95, v) == pytest.approx(expected, rel=1e-12)

    def test_nonpositive_bandwidth(self):
        with pytest.raises(ValueError):
            boundary_kernel("epanechnikov", 0.0, 0.0, 0.0)

    @pytest.mark.parametrize("name", KERNEL_NAMES)
    @settings(max_examples=30, deadline=None)
    @given(h=st.floats(0.01, 3.0), v=st.floats(-1.0, 1.0))
    def test_integrates_to_one_over_domain(self, name, h, v):
        k = get_kernel(name)
        lo, hi = max(-1.0, v - h), min(1.0, v + h)
        val, _ = integrate.quad(lambda u: float(k.boundary(h, u, v, -1.0, 1.0)), lo, hi, epsabs=1e-13, epsrel=1e-13)
        assert abs(val - 1) < 1e-10

    @given(h=st.floats(0.01, 0.4), v=st.floats(-0.5, 0.5), u=st.floats(-1, 1))
    def test_reduces_to_plain_kernel_in_interior(self, h, v, u):
        k = get_kernel("quartic")
        assert k.boundary(h, u, v, -1.0, 1.0) == float(k((u - v) / h)) / h
