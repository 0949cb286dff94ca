import dataclasses

import numpy as np
import pytest
from numpy.testing import assert_allclose

from localadd.bench.catalog import get_function
from localadd.bench.designs import DesignSpec
from localadd.bench.harness import (
    H_LADDER,
    SCENARIOS,
    W_LADDER,
    Scenario,
    default_param_grid,
    estimator_weights,
    fig3_scenario,
    plot_rows,
    run_mase_unconditional,
    run_mise,
    table1_scenario,
)
from localadd.data import Dataset


class LinearTruth:
    name = "linear"
    d = 2
    alpha = 0.0

    def __call__(self, x):
        x = np.atleast_2d(x)
        return 0.5 + x[:, 0] - 2 * x[:, 1]


class TestGrids:
    def test_ladders(self):
        assert H_LADDER[0] == 1.0
        assert H_LADDER[-1] == pytest.approx(1.1612**-16, abs=1e-4)
        assert 0.1234 in H_LADDER and 0.2605 in H_LADDER
        assert W_LADDER[0] == 2.0
        ratios = np.array(W_LADDER[:-1]) / np.array(W_LADDER[1:])
        assert_allclose(ratios, 1.1612, atol=1e-3)

    def test_ladd_cells_keep_h_below_w(self):
        cells = default_param_grid("ladd")
        assert all(c["h"] < c["w"] for c in cells)
        assert len(default_param_grid("ll")) == len(H_LADDER)
        with pytest.raises(ValueError):
            default_param_grid("gam")

    def test_estimator_weights_rows_sum_to_one(self):
        x = np.random.default_rng(0).uniform(-1, 1, (150, 2))
        data = Dataset(x, np.zeros(150))
        pts = np.array([[0.0, 0.0], [0.9, -0.9]])
        for est, params in (("ladd", {"h": 0.3, "w": 0.8}), ("ll", {"h": 0.4}), ("add", {"h": 0.4})):
            W, ok = estimator_weights(est, data, params, pts)
            assert ok.all()
            assert_allclose(W.sum(axis=1), 1.0, atol=1e-8)


class TestRunMise:
    def small(self, **kw):
        base = dict(R=20, estimators={"ll": [{"h": 0.5}], "add": [{"h": 0.4}], "ladd": [{"h": 0.3, "w": 0.9}]})
        base.update(kw)
        return table1_scenario("additive_peaks", 0.1, n=144, **base)

    def test_noiseless_linear_local_linear(self):
        sc = Scenario("lin", LinearTruth(), DesignSpec("random_uniform", 150, 2), 0.0, R=2,
                      estimators={"ll": [{"h": 0.5}], "ladd": [{"h": 0.3, "w": 0.8}]})
        rep = run_mise(sc)
        assert rep["ll"].best.mise <= 1e-16
        assert rep["ladd"].best.mise <= 1e-16

    def test_decomposition_identity(self):
        rep = run_mise(self.small())
        for res in rep.results.values():
            for c in res.cells:
                assert c.mise == c.bias2 + c.var
                assert c.bias2 >= 0 and c.var >= 0

    def test_exact_moments_agree_with_replicates(self):
        rep = run_mise(self.small(R=400))
        c = rep["add"].best
        assert c.var == pytest.approx(c.exact_var, rel=0.2)

    def test_seeded_determinism(self):
        a = run_mise(self.small()).as_dict(with_cells=True)
        b = run_mise(self.small()).as_dict(with_cells=True)
        a.pop("runtime_s"), b.pop("runtime_s")
        assert a == b

    def test_threads_do_not_change_results(self):
        sc = self.small(estimators={"add": [{"h": 0.3}, {"h": 0.5}, {"h": 0.7}]})
        a = run_mise(sc).as_dict(with_cells=True)["estimators"]
        b = run_mise(sc, workers=3).as_dict(with_cells=True)["estimators"]
        assert a == b

    def test_normalization(self):
        mean = run_mise(self.small(estimators={"add": [{"h": 0.4}]}))
        integral = run_mise(self.small(estimators={"add": [{"h": 0.4}]}, normalize="integral"))
        assert integral["add"].best.mise == pytest.approx(4 * mean["add"].best.mise)
        assert mean.as_dict()["normalize"] == "mean"
        with pytest.raises(ValueError):
            self.small(normalize="sum")

    def test_coverage_marks_invalid(self):
        sc = self.small(estimators={"ladd": [{"h": 0.05, "w": 0.1}, {"h": 0.3, "w": 0.9}]})
        rep = run_mise(sc)
        tiny, ok = rep["ladd"].cells
        assert tiny.coverage < 0.95 and not tiny.valid
        assert ok.valid
        assert rep["ladd"].best.params == {"h": 0.3, "w": 0.9}

    def test_plot_rows(self):
        rows = plot_rows(run_mise(self.small()))
        assert len(rows) == 3
        assert {r["estimator"] for r in rows} == {"ll", "add", "ladd"}
        ladd = next(r for r in rows if r["estimator"] == "ladd")
        assert ladd["w"] == 0.9 and ladd["h"] == 0.3

    def test_validation(self):
        with pytest.raises(ValueError):
            self.small(R=1)
        with pytest.raises(ValueError):
            self.small(estimators={"gam": [{"h": 0.5}]})
        with pytest.raises(ValueError):
            Scenario("bad", get_function("periodic"), DesignSpec("random_uniform", 100, 3), 0.1)

    def test_monotone_information(self):
        fn = get_function("additive_peaks")
        grid = [{"h": h} for h in (0.15, 0.2, 0.3, 0.4, 0.5)]
        small = run_mise(Scenario("a", fn, DesignSpec("random_uniform", 200, 2), 0.3, R=50, estimators={"add": grid}))
        large = run_mise(Scenario("b", fn, DesignSpec("random_uniform", 1600, 2), 0.3, R=50, estimators={"add": grid}))
        assert large["add"].best.mise < small["add"].best.mise

    def test_scenario_registry(self):
        assert set(SCENARIOS) == {"table1-additive-peaks", "table1-superposed", "table1-periodic", "fig3-sweep"}
        sc = fig3_scenario(alpha=0.4, R=5)
        assert sc.fn.alpha == 0.4 and sc.sigma == 0.5
        assert dataclasses.replace(sc, R=7).R == 7


class TestMase:
    def test_noiseless_additive(self):
        fn = get_function("d10_interact", 10, 0.0)
        # without noise only the curvature bias of x1^2 remains, about (mu2 h^2)^2
        out = run_mase_unconditional(fn, n=2000, sigma=0.0, runs=1, eval_points=50,
                                     estimators={"add": [{"h": 0.15}]}, seed=1)
        assert out["add"]["best"]["mase"] <= 1e-4

    def test_structure(self):
        fn = get_function("d10_interact", 10, 0.5)
        cells = {"ladd": [{"h": 0.6, "w": 2.0}], "add": [{"h": 0.6}, {"h": 0.9}]}
        out = run_mase_unconditional(fn, n=300, sigma=0.2, runs=2, eval_points=10, estimators=cells)
        assert len(out["add"]["cells"]) == 2
        assert len(out["add"]["gcv_selected"]) == 2
        assert out["add"]["gcv_selected"][0] in cells["add"]

    def test_full_window_matches_additive(self):
        fn = get_function("d10_interact", 10, 0.0)
        cells = {"ladd": [{"h": 0.8, "w": 2.0}], "add": [{"h": 0.8}]}
        out = run_mase_unconditional(fn, n=500, sigma=0.2, runs=3, eval_points=20, estimators=cells)
        assert out["ladd"]["best"]["mase"] == pytest.approx(out["add"]["best"]["mase"], rel=0.05)
