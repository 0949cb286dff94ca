"""Monte-Carlo comparison of local additive, local linear and additive fits.

Every estimator here is linear in the response, so for one parameter cell the
fits at all output points and all replicates are ``W @ Y`` with ``W`` the
(points x n) weight matrix and ``Y`` the (n x R) matrix of simulated
responses.  ``W`` is built once per cell.
"""
from __future__ import annotations

import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..data import Dataset
from ..local_additive import (
    InsufficientDataError,
    SmoothingParams,
    additive_weights,
    default_n_min,
    local_additive_weights,
)
from ..local_linear import local_linear_weights
from ..sbe import EvalGrid, get_backend
from ..selection import plugin_diagonal
from ..local_additive import window_extract
from .catalog import RegressionFunction, get_function
from .designs import DesignSpec, draw_noise, gen_design

__all__ = [
    "ESTIMATORS",
    "H_LADDER",
    "W_LADDER",
    "default_param_grid",
    "Scenario",
    "CellResult",
    "EstimatorResult",
    "SimulationReport",
    "estimator_weights",
    "run_mise",
    "run_mase_unconditional",
    "table1_scenario",
    "fig3_scenario",
    "SCENARIOS",
    "plot_rows",
]

ESTIMATORS = ("ladd", "ll", "add")
COVERAGE_MIN = 0.95

# geometric ladders with ratio 1.1612: bandwidths from 1 down, windows from the full width 2 down
H_LADDER = tuple(round(1.1612 ** (-k), 4) for k in range(17))
W_LADDER = tuple(round(2.0 * 1.1612 ** (-k), 4) for k in range(16))


def default_param_grid(estimator: str, h_ladder=H_LADDER, w_ladder=W_LADDER) -> list:
    """Parameter cells as dicts; local additive cells keep ``h < w``."""
    if estimator == "ladd":
        return [{"h": h, "w": w} for w in w_ladder for h in h_ladder if h < w]
    if estimator in ("ll", "add"):
        return [{"h": h} for h in h_ladder]
    raise ValueError(f"unknown estimator {estimator!r}")


def estimator_weights(estimator: str, data: Dataset, params: dict, points, kernel="epanechnikov", n_min=None):
    """Weight matrix ``W`` (points x n) and a mask of points where the fit exists."""
    points = np.atleast_2d(points)
    if estimator == "ll":
        return local_linear_weights(data, params["h"], points, kernel)
    if estimator == "add":
        backend = get_backend("sbe-ll", kernel=kernel)
        try:
            return additive_weights(data, params["h"], points, backend), np.ones(len(points), bool)
        except ValueError:
            return np.zeros((len(points), data.n)), np.zeros(len(points), bool)
    if estimator != "ladd":
        raise ValueError(f"unknown estimator {estimator!r}")
    backend = get_backend("sbe-ll", kernel=kernel)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        sp = SmoothingParams.scalar(params["h"], params["w"], data.d)
    W = np.zeros((len(points), data.n))
    ok = np.ones(len(points), dtype=bool)
    for i, p in enumerate(points):
        try:
            W[i] = local_additive_weights(data, sp, p, backend, n_min)
        except (InsufficientDataError, ValueError):
            ok[i] = False
    return W, ok


@dataclass(frozen=True)
class Scenario:
    """One simulation setting with fixed design (conditional MISE)."""

    name: str
    fn: RegressionFunction
    design: DesignSpec
    sigma: float
    R: int = 200
    grid_size: int = 21
    estimators: dict = field(default_factory=lambda: {e: default_param_grid(e) for e in ESTIMATORS})
    seed: int = 0
    kernel: str = "epanechnikov"
    noise: Callable | None = None
    normalize: str = "mean"

    def __post_init__(self):
        if self.normalize not in ("integral", "mean"):
            raise ValueError("normalize must be 'integral' or 'mean'")
        if self.R < 2:
            raise ValueError("need at least 2 replicates")
        if self.fn.d != self.design.d:
            raise ValueError("function and design dimensions differ")
        for est in self.estimators:
            if est not in ESTIMATORS:
                raise ValueError(f"unknown estimator {est!r}")


@dataclass(frozen=True)
class CellResult:
    params: dict
    mise: float
    bias2: float
    var: float
    coverage: float
    valid: bool
    exact_bias2: float
    exact_var: float

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class EstimatorResult:
    name: str
    best: CellResult | None
    cells: tuple

    def as_dict(self, with_cells=False) -> dict:
        out = {"mise": None, "bias2": None, "var": None, "params": {}}
        if self.best is not None:
            out.update(
                mise=self.best.mise, bias2=self.best.bias2, var=self.best.var, params=self.best.params,
                coverage=self.best.coverage,
            )
        if with_cells:
            out["cells"] = [c.as_dict() for c in self.cells]
        return out


@dataclass(frozen=True)
class SimulationReport:
    scenario: str
    sigma: float
    n: int
    R: int
    seed: int
    results: dict
    runtime: dict
    normalize: str = "mean"

    def __getitem__(self, estimator) -> EstimatorResult:
        return self.results[estimator]

    def as_dict(self, with_cells=False) -> dict:
        return {
            "scenario": self.scenario,
            "sigma": self.sigma,
            "normalize": self.normalize,
            "n": self.n,
            "R": self.R,
            "seed": self.seed,
            "estimators": {k: v.as_dict(with_cells) for k, v in self.results.items()},
            "runtime_s": self.runtime,
        }


def _quadrature(grid_size: int, d: int, normalize: str = "mean"):
    """Output points and trapezoid weights; ``mean`` divides by the domain volume."""
    grid = EvalGrid.regular(-1.0, 1.0, grid_size, d)
    pts = grid.mesh()
    weights = np.ones(1)
    for w_axis in grid.weights:
        weights = np.multiply.outer(weights, w_axis).reshape(-1)
    if normalize == "mean":
        weights = weights / weights.sum()
    return pts, weights


def _evaluate_cell(estimator, data, params, points, truth_pts, truth_design, Y, sigma, qw, kernel):
    W, ok = estimator_weights(estimator, data, params, points, kernel)
    coverage = float(ok.mean())
    if not ok.any():
        nan = float("nan")
        return CellResult(params, nan, nan, nan, coverage, False, nan, nan)
    Wk = W[ok]
    # points without a fit are dropped and the remaining weights rescaled to the full mass
    wk = qw[ok] * (qw.sum() / qw[ok].sum())
    fits = Wk @ Y
    mean_fit = fits.mean(axis=1)
    bias2 = float(wk @ (mean_fit - truth_pts[ok]) ** 2)
    var = float(wk @ np.mean((fits - mean_fit[:, None]) ** 2, axis=1))
    ex_bias2 = float(wk @ (Wk @ truth_design - truth_pts[ok]) ** 2)
    ex_var = float(sigma**2 * (wk @ np.sum(Wk**2, axis=1)))
    return CellResult(
        dict(params), bias2 + var, bias2, var, coverage, coverage >= COVERAGE_MIN, ex_bias2, ex_var
    )


def run_mise(scenario: Scenario, workers: int = 1) -> SimulationReport:
    """Conditional MISE over one fixed design for every estimator and parameter cell.

    MISE, squared bias and variance are trapezoid integrals over the output
    grid against the uniform probability measure on [-1, 1]^d (the default
    ``normalize="mean"``) or against Lebesgue measure (``"integral"``), so
    ``mise == bias2 + var`` by construction.
    Cells whose fits exist at fewer than 95% of the output points are marked
    invalid and excluded from the optimum.
    """
    x = gen_design(scenario.design)
    truth_design = scenario.fn(x)
    data = Dataset(x, truth_design)
    rng = np.random.default_rng([scenario.seed, 1])
    Y = truth_design[:, None] + draw_noise(rng, scenario.sigma, (data.n, scenario.R), scenario.noise)
    points, qw = _quadrature(scenario.grid_size, data.d, scenario.normalize)
    truth_pts = scenario.fn(points)

    results = {}
    runtime = {}
    for est, cells in scenario.estimators.items():
        start = time.perf_counter()

        def job(params, est=est):
            return _evaluate_cell(est, data, params, points, truth_pts, truth_design, Y, scenario.sigma, qw, scenario.kernel)

        if workers > 1:
            with ThreadPoolExecutor(workers) as pool:
                out = tuple(pool.map(job, cells))
        else:
            out = tuple(job(p) for p in cells)
        valid = [c for c in out if c.valid]
        best = min(valid, key=lambda c: c.mise) if valid else None
        results[est] = EstimatorResult(est, best, out)
        runtime[est] = time.perf_counter() - start
    return SimulationReport(
        scenario.name, scenario.sigma, data.n, scenario.R, scenario.seed, results, runtime, scenario.normalize
    )


def plot_rows(report: SimulationReport) -> list:
    """Long-format rows (scenario, estimator, h, w, mise, bias2, var) for every cell."""
    rows = []
    for est, res in report.results.items():
        for c in res.cells:
            rows.append(
                {
                    "scenario": report.scenario,
                    "estimator": est,
                    "h": c.params.get("h"),
                    "w": c.params.get("w", ""),
                    "mise": c.mise,
                    "bias2": c.bias2,
                    "var": c.var,
                }
            )
    return rows


def _gcv_plugin(data, estimator, params, W_eval, eval_idx, kernel):
    """GCV from residuals at the evaluation design points and a plug-in trace."""
    resid = data.y[eval_idx] - W_eval @ data.y
    s2 = float(np.mean(resid**2))
    n = data.n
    if estimator == "ladd":
        h_tilde = np.full(data.d, params["h"] / params["w"])
        diag = []
        for i in eval_idx:
            try:
                win = window_extract(data, data.x[i], np.full(data.d, params["w"]))
            except InsufficientDataError:
                continue
            diag.append(plugin_diagonal(h_tilde, win.n_tilde, kernel))
        tr = n * float(np.mean(diag)) if diag else np.inf
    else:
        tr = float(np.mean(np.diag(W_eval[:, eval_idx]))) * n
    if tr >= n:
        return np.inf
    return s2 / (1 - tr / n) ** 2


def run_mase_unconditional(
    fn: RegressionFunction | None = None,
    n: int = 2000,
    sigma: float = 0.2,
    runs: int = 20,
    eval_points: int = 50,
    estimators: dict | None = None,
    seed: int = 0,
    kernel: str = "epanechnikov",
    noise: Callable | None = None,
) -> dict:
    """Unconditional MASE: design and noise are redrawn for every run.

    The error of each fit is averaged over ``eval_points`` design points drawn
    at random per run.  For every run the GCV-preferred cell is also recorded.
    """
    fn = fn or get_function("d10_interact", 10, 0.0)
    if estimators is None:
        estimators = {"ladd": [{"h": 0.5, "w": 2.0}], "add": [{"h": 0.5}]}
    d = fn.d
    rng = np.random.default_rng([seed, 2])
    sq = {est: np.zeros((runs, len(cells))) for est, cells in estimators.items()}
    gcv_choice = {est: [] for est in estimators}
    for run in range(runs):
        x = 2 * rng.random((n, d)) - 1
        truth = fn(x)
        y = truth + draw_noise(rng, sigma, n, noise)
        data = Dataset(x, y)
        idx = np.sort(rng.choice(n, size=eval_points, replace=False))
        for est, cells in estimators.items():
            gcv = []
            for k, params in enumerate(cells):
                W, ok = estimator_weights(est, data, params, x[idx], kernel)
                if not ok.all():
                    sq[est][run, k] = np.nan
                    gcv.append(np.inf)
                    continue
                sq[est][run, k] = float(np.mean((W @ y - truth[idx]) ** 2))
                gcv.append(_gcv_plugin(data, est, params, W, idx, kernel))
            gcv_choice[est].append(cells[int(np.argmin(gcv))])
    out = {"n": n, "sigma": sigma, "runs": runs, "eval_points": eval_points, "function": fn.name, "alpha": fn.alpha}
    for est, cells in estimators.items():
        mase = np.nanmean(sq[est], axis=0)
        se = np.nanstd(sq[est], axis=0, ddof=1) / np.sqrt(runs) if runs > 1 else np.full(len(cells), np.nan)
        best = int(np.nanargmin(mase))
        out[est] = {
            "cells": [dict(c, mase=float(m), se=float(s)) for c, m, s in zip(cells, mase, se)],
            "best": dict(cells[best], mase=float(mase[best])),
            "gcv_selected": gcv_choice[est],
        }
    return out


def table1_scenario(function: str, sigma: float, n: int = 400, R: int = 200, seed: int = 0, **kw) -> Scenario:
    fn = get_function(function, 2, kw.pop("alpha", 0.0))
    design = DesignSpec(kw.pop("design", "random_uniform"), n, 2, seed)
    return Scenario(f"table1-{function}", fn, design, sigma, R, seed=seed, **kw)


def fig3_scenario(alpha: float = 0.4, sigma: float = 0.5, n: int = 400, R: int = 200, seed: int = 0, **kw) -> Scenario:
    fn = get_function("quad_interact", 2, alpha)
    design = DesignSpec(kw.pop("design", "random_uniform"), n, 2, seed)
    return Scenario(f"fig3-quad_interact-a{alpha}", fn, design, sigma, R, seed=seed, **kw)


SCENARIOS = {
    "table1-additive-peaks": lambda **kw: table1_scenario("additive_peaks", **kw),
    "table1-superposed": lambda **kw: table1_scenario("superposed_peaks", **kw),
    "table1-periodic": lambda **kw: table1_scenario("periodic", **kw),
    "fig3-sweep": fig3_scenario,
}
