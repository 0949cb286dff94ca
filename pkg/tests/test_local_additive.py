import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from localadd.bench.designs import DesignSpec, gen_design
from localadd.data import Dataset
from localadd.local_additive import (
    InsufficientDataError,
    SmoothingParams,
    bilinear_diagnostic,
    default_n_min,
    fit_additive,
    fit_local_additive,
    fit_local_additive_grid,
    local_additive_weights,
    window_extract,
)
from localadd.sbe import get_backend, grid_for_bandwidth
from oracles import smoothed_lsq_oracle


def uniform_data(n=400, seed=0, fn=None):
    x = np.random.default_rng(seed).uniform(-1, 1, (n, 2))
    y = fn(x) if fn is not None else np.random.default_rng(seed + 1).normal(size=n)
    return Dataset(x, y)


class TestSmoothingParams:
    def test_broadcast_and_ratio(self):
        p = SmoothingParams.scalar(0.2, 0.5, 3)
        assert_allclose(p.h_tilde, [0.4, 0.4, 0.4])

    def test_warns_on_large_ratio(self):
        with pytest.warns(RuntimeWarning):
            SmoothingParams(0.6, 0.5)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            SmoothingParams(0.0, 0.5)

    def test_n_min_default(self):
        assert default_n_min(2) == 20
        assert default_n_min(10) == 40


class TestWindowExtract:
    def test_full_window(self):
        data = uniform_data(50)
        win = window_extract(data, [0.0, 0.0], [2.0, 2.0], n_min=1)
        assert win.n_tilde == 50
        assert_allclose(win.u, data.x / 2.0)
        assert_allclose(win.lo, [-0.5, -0.5])
        assert_allclose(win.hi, [0.5, 0.5])

    def test_membership(self):
        data = Dataset([[0.2, 0.1], [0.9, 0.0]], [1.0, 2.0])
        win = window_extract(data, [0.0, 0.0], [0.5, 0.5], n_min=1)
        assert win.n_tilde == 1
        assert_allclose(win.u, [[0.4, 0.2]])
        assert_allclose(win.ubar, [0.4, 0.2])

    def test_closed_rectangle(self):
        data = Dataset([[0.5, 0.0], [-0.5, 0.5], [0.6, 0.0]], [0.0, 0.0, 0.0])
        assert window_extract(data, [0.0, 0.0], 0.5, n_min=1).n_tilde == 2

    def test_binomial_count(self):
        data = uniform_data(400, 3)
        n_tilde = window_extract(data, [0.0, 0.0], 0.94).n_tilde
        # the window covers (2 * 0.94)^2 of the area 4
        p = 0.94**2
        assert 400 * p == pytest.approx(353.44)
        assert abs(n_tilde - 400 * p) <= 3 * np.sqrt(400 * p * (1 - p))

    def test_insufficient(self):
        data = uniform_data(100)
        with pytest.raises(InsufficientDataError) as exc:
            window_extract(data, [1.0, 1.0], 0.1)
        assert exc.value.n_tilde < 20

    @settings(max_examples=20, deadline=None)
    @given(w1=st.floats(0.05, 2.0), w2=st.floats(0.05, 2.0), x0=st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
    def test_monotone_in_w(self, w1, w2, x0):
        data = uniform_data(200)
        small, large = sorted([w1, w2])
        n_small = window_extract(data, x0, small, n_min=0).n_tilde
        n_large = window_extract(data, x0, large, n_min=0).n_tilde
        assert n_small <= n_large

    def test_clipped_window_bounds(self):
        data = uniform_data(400)
        win = window_extract(data, [-1.0, 0.6], 0.5)
        assert_allclose(win.lo, [0.0, -1.0])
        assert_allclose(win.hi, [1.0, 0.8])
        assert np.all(win.u >= win.lo) and np.all(win.u <= win.hi)


class TestFitLocalAdditive:
    def test_full_window_is_global_additive(self):
        data = uniform_data(200, 4)
        params = SmoothingParams.scalar(0.6, 2.0, 2)
        local = fit_local_additive(data, params, [0.0, 0.0])
        glob = fit_additive(data, 0.6, [[0.0, 0.0]])[0]
        assert local == pytest.approx(glob, abs=1e-8)

    @settings(max_examples=15, deadline=None)
    @given(h=st.floats(0.1, 0.6), w=st.floats(0.4, 2.0), x0=st.tuples(st.floats(-1, 1), st.floats(-1, 1)))
    def test_linear_additive_exact(self, h, w, x0):
        data = uniform_data(300, 5, fn=lambda x: 1.5 - 2 * x[:, 0] + 0.7 * x[:, 1])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            params = SmoothingParams.scalar(h, w, 2)
        val = fit_local_additive(data, params, x0)
        assert val == pytest.approx(1.5 - 2 * x0[0] + 0.7 * x0[1], abs=1e-8)

    def test_interaction_bias_on_lattice(self):
        # r = x1^2 x2^2 at the origin: its additive projection on the window is -w^4/9
        x = gen_design(DesignSpec("fixed_equidistant", 10_000, 2))
        data = Dataset(x, x[:, 0] ** 2 * x[:, 1] ** 2)
        val = fit_local_additive(data, SmoothingParams.scalar(0.05, 0.5, 2), [0.0, 0.0])
        assert val == pytest.approx(-(0.5**4) / 9, rel=0.1)

    def test_weights_match_fit(self):
        data = uniform_data(300, 6)
        params = SmoothingParams.scalar(0.2, 0.6, 2)
        for x0 in ([0.1, 0.2], [-1.0, 0.95]):
            w = local_additive_weights(data, params, x0)
            assert w @ data.y == pytest.approx(fit_local_additive(data, params, x0), abs=1e-10)
            assert w.sum() == pytest.approx(1.0, abs=1e-8)

    @settings(max_examples=10, deadline=None)
    @given(a=st.floats(-5, 5).filter(lambda v: abs(v) > 1e-3), b=st.floats(-5, 5))
    def test_affine_equivariance(self, a, b):
        data = uniform_data(200, 7)
        params = SmoothingParams.scalar(0.3, 0.7, 2)
        x0 = [0.3, -0.6]
        base = fit_local_additive(data, params, x0)
        moved = fit_local_additive(data.with_y(a * data.y + b), params, x0)
        assert moved == pytest.approx(a * base + b, abs=1e-10 * max(1, abs(a), abs(b)) * 10)

    def test_translation_equivariance(self):
        data = uniform_data(200, 8)
        shift = np.array([3.0, -2.0])
        moved = Dataset(data.x + shift, data.y, -1 + shift, 1 + shift)
        params = SmoothingParams.scalar(0.25, 0.6, 2)
        x0 = np.array([0.2, -0.3])
        assert fit_local_additive(moved, params, x0 + shift) == pytest.approx(
            fit_local_additive(data, params, x0), abs=1e-12
        )

    def test_local_constant_backend(self):
        data = uniform_data(200, 9, fn=lambda x: np.full(len(x), 2.0))
        val = fit_local_additive(data, SmoothingParams.scalar(0.2, 0.5, 2), [0.0, 0.0], backend="sbe-lc")
        assert val == pytest.approx(2.0, abs=1e-10)


class TestGrid:
    def test_single_point(self):
        data = uniform_data(200, 10)
        params = SmoothingParams.scalar(0.3, 0.6, 2)
        res = fit_local_additive_grid(data, params, [[0.1, 0.1]])
        assert res.values[0] == pytest.approx(fit_local_additive(data, params, [0.1, 0.1]))

    def test_full_window_equals_additive(self):
        data = uniform_data(200, 11)
        pts = np.random.default_rng(0).uniform(-1, 1, (5, 2))
        res = fit_local_additive_grid(data, SmoothingParams.scalar(0.5, 2.0, 2), pts)
        # windows are centred at each point, so only the centre matches the global fit exactly
        assert np.all(res.ok)
        centre = fit_local_additive_grid(data, SmoothingParams.scalar(0.5, 2.0, 2), [[0.0, 0.0]])
        assert centre.values[0] == pytest.approx(fit_additive(data, 0.5, [[0.0, 0.0]])[0], abs=1e-8)

    def test_missing_points_reported(self):
        x = np.random.default_rng(0).uniform(-1, 0, (100, 2))
        data = Dataset(x, x[:, 0])
        res = fit_local_additive_grid(data, SmoothingParams.scalar(0.2, 0.4, 2), [[-0.5, -0.5], [0.9, 0.9]])
        assert res.status[0] == "ok"
        assert res.status[1].startswith("missing")
        assert np.isnan(res.values[1])


class TestBilinearDiagnostic:
    def test_symmetric_lattice_vanishes(self):
        x = gen_design(DesignSpec("fixed_equidistant", 41 * 41, 2))
        data = Dataset(x, np.zeros(len(x)))
        val = bilinear_diagnostic(data, 0.5, [0.0, 0.0], 0, 1, [0.3, 0.3])
        assert abs(val) <= 1e-10

    def test_hand_assembled(self):
        x = np.array([[-0.8, -0.6], [-0.5, 0.7], [0.1, -0.2], [0.4, 0.9], [0.8, -0.7], [-0.2, 0.3]])
        data = Dataset(x, np.zeros(6))
        h_tilde = 1.0
        val = bilinear_diagnostic(data, 1.0, [0.0, 0.0], 0, 1, [h_tilde, h_tilde], n_min=1)
        u = x
        resp = (u[:, 0] - u[:, 0].mean()) * (u[:, 1] - u[:, 1].mean())
        nodes = grid_for_bandwidth(-1, 1, [h_tilde, h_tilde]).nodes[0]
        m0, m1, m2 = smoothed_lsq_oracle(u, resp, h_tilde, nodes)
        centre = np.argmin(np.abs(nodes))
        assert val == pytest.approx(m0 + m1[centre] + m2[centre], abs=1e-10)

    def test_requires_distinct_coordinates(self):
        with pytest.raises(ValueError):
            bilinear_diagnostic(uniform_data(), 0.5, [0, 0], 1, 1, [0.3, 0.3])

    def test_backend_option(self):
        data = uniform_data(400, 12)
        val = bilinear_diagnostic(data, 0.8, [0.0, 0.0], 0, 1, [0.4, 0.4], backend=get_backend("sbe-lc"))
        assert np.isfinite(val)
