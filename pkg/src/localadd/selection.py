"""Smoothing-parameter selection for the local additive estimator.

The estimator is a linear smoother, ``fitted = H y``.  Row ``i`` of ``H`` is
the weight vector of the local additive fit at ``x0 = X_i``.  Criteria combine
the residual variance ``sigma2 = |y - H y|^2 / n`` with ``tr(H)``:

==========  =============================================
``aic``     log sigma2 + 2 tr/n
``aicc``    log sigma2 + 1 + 2 (tr + 1) / (n - tr - 2)
``aict``    sigma2 / sigma2_ref - 1 + 2 tr/n
``pls``     sigma2 (1 + 2 tr/n)
``gcv``     sigma2 / (1 - tr/n)^2
==========  =============================================
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset
from .kernels import get_kernel
from .local_additive import (
    InsufficientDataError,
    SmoothingParams,
    default_n_min,
    local_additive_weights,
    window_extract,
)
from .local_linear import local_linear_weights
from .sbe import get_backend

__all__ = [
    "CRITERIA",
    "TraceEstimate",
    "CriterionValue",
    "SelectionResult",
    "SelectionError",
    "sigma2_hat",
    "smoother_matrix",
    "trace_exact",
    "plugin_diagonal",
    "trace_plugin",
    "criterion_value",
    "pilot_sigma2",
    "criterion_eval",
    "select_params",
    "rescore",
    "aic_decomposition_check",
]

CRITERIA = ("aic", "aicc", "aict", "pls", "gcv")
EXACT_TRACE_MAX_N = 2000
_DIAG_FLOOR = 1e-12
_SIGMA2_FLOOR = 1e-300
_EXACT_FIT = 1e-24


class SelectionError(RuntimeError):
    """No grid cell produced a finite criterion value."""


@dataclass(frozen=True)
class TraceEstimate:
    trace: float
    method: str
    per_point_diag: np.ndarray | None = None
    enlarged: tuple = ()

    def __post_init__(self):
        if self.method not in ("exact", "plugin"):
            raise ValueError("method must be 'exact' or 'plugin'")


@dataclass(frozen=True)
class CriterionValue:
    criterion: str
    value: float
    sigma2_hat: float
    trace: TraceEstimate
    params: SmoothingParams
    defined: bool = True

    def as_dict(self) -> dict:
        return {
            "h": float(self.params.h[0]) if np.allclose(self.params.h, self.params.h[0]) else self.params.h.tolist(),
            "w": float(self.params.w[0]) if np.allclose(self.params.w, self.params.w[0]) else self.params.w.tolist(),
            "value": self.value if self.defined else None,
            "trace": self.trace.trace,
            "sigma2": self.sigma2_hat,
        }


@dataclass(frozen=True)
class SelectionResult:
    best: CriterionValue
    surface: tuple
    h_grid: tuple = field(default=())
    w_grid: tuple = field(default=())

    def value_table(self) -> np.ndarray:
        """Criterion values as an array indexed [h, w] (inf where undefined)."""
        table = np.full((len(self.h_grid), len(self.w_grid)), np.inf)
        for cell in self.surface:
            i = _grid_index(self.h_grid, cell.params.h[0])
            k = _grid_index(self.w_grid, cell.params.w[0])
            table[i, k] = cell.value if cell.defined else np.inf
        return table

    def as_dict(self) -> dict:
        return {
            "criterion": self.best.criterion,
            "best": self.best.as_dict(),
            "surface": [c.as_dict() for c in self.surface],
        }


def _grid_index(grid, value):
    return int(np.argmin(np.abs(np.asarray(grid) - value)))


def sigma2_hat(y, fitted) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.mean((y - np.asarray(fitted, dtype=float)) ** 2))


def _params_covering(data, params, x0, n_min):
    """Double ``w`` until the window at ``x0`` holds ``n_min`` points."""
    params = params.for_dim(data.d)
    w = params.w.copy()
    enlarged = False
    limit = 2.0 * np.max(data.hi - data.lo)
    while True:
        try:
            window_extract(data, x0, w, n_min)
            break
        except InsufficientDataError:
            if np.all(w >= limit):
                raise
            w = np.minimum(2.0 * w, limit)
            enlarged = True
    if not enlarged:
        return params, False
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        return SmoothingParams(params.h, w), True


def smoother_matrix(data: Dataset, params: SmoothingParams, backend="sbe-ll", n_min=None):
    """Hat matrix of the local additive estimator at the design points.

    Returns ``(H, enlarged)`` where ``enlarged`` lists rows computed with a
    doubled window because the requested one held too few points.
    """
    backend = get_backend(backend)
    if n_min is None:
        n_min = default_n_min(data.d)
    H = np.empty((data.n, data.n))
    enlarged = []
    for i in range(data.n):
        p_i, grew = _params_covering(data, params, data.x[i], n_min)
        if grew:
            enlarged.append(i)
        H[i] = local_additive_weights(data, p_i, data.x[i], backend, n_min)
    return H, tuple(enlarged)


def trace_exact(data: Dataset, params: SmoothingParams, backend="sbe-ll", n_min=None) -> TraceEstimate:
    if data.n > EXACT_TRACE_MAX_N:
        raise ValueError(f"exact trace is limited to n <= {EXACT_TRACE_MAX_N}; use the plugin")
    H, enlarged = smoother_matrix(data, params, backend, n_min)
    diag = np.diag(H).copy()
    return TraceEstimate(float(diag.sum()), "exact", diag, enlarged)


def plugin_diagonal(h_tilde, n_tilde, kernel="epanechnikov", side=2.0, mass=1.0) -> float:
    """Approximate self-weight of a point in its own window fit.

    An additive smoother gives point ``i`` the weight
    ``(sum_j K_h(X_ij, x_j) / f_j(x_j) - (d - 1)) / n`` at ``x``.  With a
    uniform design on a rescaled window of side lengths ``side`` this is
    ``(sum_j side_j K(0) / (h_j mass_j) - (d - 1)) / n_tilde``, where
    ``K(0) / mass_j`` is the boundary-corrected kernel at the window centre
    (``mass_j = 1`` away from the edges).  For ``side = 2`` this equals
    ``2 (K(0) sum 1/h - (d-1)/2) / n``.
    The bracket is floored at a small positive value.
    """
    h_tilde = np.atleast_1d(np.asarray(h_tilde, dtype=float))
    side = np.broadcast_to(np.asarray(side, dtype=float), h_tilde.shape)
    mass = np.broadcast_to(np.asarray(mass, dtype=float), h_tilde.shape)
    d = h_tilde.size
    core = get_kernel(kernel).at_zero * np.sum(side / (h_tilde * mass)) - (d - 1)
    return max(core, _DIAG_FLOOR) / n_tilde


def _centre_mass(kernel, h_tilde, lo, hi, local_linear=True):
    """Inverse of the boundary correction of ``K(0)`` at the window centre.

    A local linear fit at a truncated centre uses the equivalent kernel
    ``K(0) mu_2 / (mu_0 mu_2 - mu_1^2)`` built from the truncated moments; a
    local constant fit uses ``K(0) / mu_0``.
    """
    a, b = lo / h_tilde, hi / h_tilde
    mu0 = kernel.partial_moment(0, a, b)
    if not local_linear:
        return mu0
    mu1 = kernel.partial_moment(1, a, b)
    mu2 = kernel.partial_moment(2, a, b)
    return (mu0 * mu2 - mu1**2) / mu2


def trace_plugin(
    data: Dataset, params: SmoothingParams, kernel="epanechnikov", n_min=None, local_linear: bool = True
) -> TraceEstimate:
    """Plug-in trace from window counts and shapes alone; no fits are computed."""
    if n_min is None:
        n_min = default_n_min(data.d)
    kernel = get_kernel(kernel)
    diag = np.empty(data.n)
    enlarged = []
    for i in range(data.n):
        p_i, grew = _params_covering(data, params, data.x[i], n_min)
        if grew:
            enlarged.append(i)
        win = window_extract(data, data.x[i], p_i.w, n_min)
        mass = _centre_mass(kernel, p_i.h_tilde, win.lo, win.hi, local_linear)
        diag[i] = plugin_diagonal(p_i.h_tilde, win.n_tilde, kernel, win.hi - win.lo, mass)
    return TraceEstimate(float(diag.sum()), "plugin", diag, tuple(enlarged))


def criterion_value(criterion: str, sigma2: float, trace: float, n: int, sigma2_ref=None):
    """Return ``(value, defined)``; undefined criteria come back as ``(inf, False)``."""
    criterion = criterion.lower()
    if criterion not in CRITERIA:
        raise ValueError(f"criterion must be one of {CRITERIA}")
    if criterion == "aicc" and trace >= n - 2:
        return math.inf, False
    if criterion == "gcv" and trace >= n:
        return math.inf, False
    if criterion in ("aic", "aicc"):
        # an exact fit gets a common finite floor, so cells are ranked by their penalty
        log_s2 = math.log(max(sigma2, _SIGMA2_FLOOR))
    if criterion == "aic":
        return log_s2 + 2 * trace / n, True
    if criterion == "aicc":
        return log_s2 + 1 + 2 * (trace + 1) / (n - trace - 2), True
    if criterion == "aict":
        if sigma2_ref is None or sigma2_ref <= 0:
            raise ValueError("aict needs a positive reference variance")
        return sigma2 / sigma2_ref - 1 + 2 * trace / n, True
    if criterion == "pls":
        return sigma2 * (1 + 2 * trace / n), True
    return sigma2 / (1 - trace / n) ** 2, True


def pilot_sigma2(data: Dataset, h=0.5, kernel="epanechnikov") -> float:
    """Residual variance of a local linear pilot fit, ``RSS / (n - tr H)``."""
    h = np.broadcast_to(np.asarray(h, dtype=float), (data.d,)) * (data.hi - data.lo) / 2
    W, ok = local_linear_weights(data, h, data.x, kernel)
    if not np.all(ok):
        raise ValueError("pilot bandwidth too small for the design")
    resid = data.y - W @ data.y
    return float(resid @ resid / (data.n - np.trace(W)))


def _resolve_trace_method(method, n):
    if method in (None, "auto"):
        return "exact" if n <= EXACT_TRACE_MAX_N else "plugin"
    if method not in ("exact", "plugin"):
        raise ValueError("trace method must be 'exact', 'plugin' or 'auto'")
    return method


def _cell(data, params, backend, trace_method, n_min):
    """Fitted values and trace for one parameter cell."""
    H, enlarged = smoother_matrix(data, params, backend, n_min)
    fitted = H @ data.y
    if trace_method == "exact":
        diag = np.diag(H).copy()
        tr = TraceEstimate(float(diag.sum()), "exact", diag, enlarged)
    else:
        tr = trace_plugin(data, params, backend.kernel, n_min, backend.variant == "local_linear")
    return fitted, tr


def criterion_eval(
    data: Dataset,
    params: SmoothingParams,
    criterion: str = "aicc",
    backend="sbe-ll",
    trace_method: str = "auto",
    sigma2_ref=None,
    n_min=None,
) -> CriterionValue:
    backend = get_backend(backend)
    trace_method = _resolve_trace_method(trace_method, data.n)
    if criterion == "aict" and sigma2_ref is None:
        sigma2_ref = pilot_sigma2(data, kernel=backend.kernel)
    fitted, tr = _cell(data, params, backend, trace_method, n_min)
    s2 = sigma2_hat(data.y, fitted)
    if s2 <= _EXACT_FIT * max(1.0, float(np.mean(data.y**2))):
        s2 = 0.0
    value, defined = criterion_value(criterion, s2, tr.trace, data.n, sigma2_ref)
    return CriterionValue(criterion, value, s2, tr, params.for_dim(data.d), defined)


def select_params(
    data: Dataset,
    h_grid,
    w_grid,
    criterion: str = "aicc",
    backend="sbe-ll",
    trace_method: str = "auto",
    sigma2_ref=None,
    n_min=None,
) -> SelectionResult:
    """Grid search over (h, w); ties go to the smaller w, then the smaller h."""
    h_grid = tuple(sorted(float(h) for h in np.atleast_1d(h_grid)))
    w_grid = tuple(sorted(float(w) for w in np.atleast_1d(w_grid)))
    if not h_grid or not w_grid:
        raise ValueError("parameter grids must be non-empty")
    if min(h_grid) <= 0:
        raise ValueError("bandwidths must be positive")
    width = float(np.max(data.hi - data.lo))
    if min(w_grid) <= 0 or max(w_grid) > width:
        raise ValueError(f"window half-widths must lie in (0, {width}]")
    backend = get_backend(backend)
    trace_method = _resolve_trace_method(trace_method, data.n)
    if criterion == "aict" and sigma2_ref is None:
        sigma2_ref = pilot_sigma2(data, kernel=backend.kernel)

    surface = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for w in w_grid:
            for h in h_grid:
                params = SmoothingParams.scalar(h, w, data.d)
                surface.append(
                    criterion_eval(data, params, criterion, backend, trace_method, sigma2_ref, n_min)
                )
    finite = [c for c in surface if c.defined and np.isfinite(c.value)]
    if not finite:
        raise SelectionError(f"criterion {criterion!r} is undefined on every grid cell")
    # surface is ordered by (w, h), so the first minimum honours the tie-break
    best = min(finite, key=lambda c: c.value)
    return SelectionResult(best, tuple(surface), h_grid, w_grid)


def rescore(result: SelectionResult, criterion: str, n: int, sigma2_ref=None) -> SelectionResult:
    """Re-rank an evaluated surface under another criterion without refitting."""
    surface = []
    for cell in result.surface:
        value, defined = criterion_value(criterion, cell.sigma2_hat, cell.trace.trace, n, sigma2_ref)
        surface.append(CriterionValue(criterion, value, cell.sigma2_hat, cell.trace, cell.params, defined))
    finite = [c for c in surface if c.defined and np.isfinite(c.value)]
    if not finite:
        raise SelectionError(f"criterion {criterion!r} is undefined on every grid cell")
    best = min(finite, key=lambda c: c.value)
    return SelectionResult(best, tuple(surface), result.h_grid, result.w_grid)


def aic_decomposition_check(
    data: Dataset,
    truth,
    sigma: float,
    params: SmoothingParams | None = None,
    replicates: int = 200,
    seed: int = 0,
    backend="sbe-ll",
    H: np.ndarray | None = None,
    n_min=None,
) -> dict:
    """Monte-Carlo check of the bias/variance split of AIC_T.

    With ``e`` the noise vector and ``r`` the true regression values at the
    design points, compares the replicate mean of

        AIC_T - (e'e / (n sigma^2) - 1)

    with ``|(I - H) r|^2 / (n sigma^2) + sigma^2 tr(H'H) / (n sigma^2)``.
    ``H`` may be passed directly (e.g. the zero smoother); otherwise it is
    the local additive hat matrix for ``params``.
    """
    r = np.asarray(truth, dtype=float)
    n = r.size
    if H is None:
        H, _ = smoother_matrix(data, params, backend, n_min)
    IH = np.eye(n) - H
    tr = float(np.trace(H))
    s2 = sigma**2
    rng = np.random.default_rng(seed)
    eps = rng.normal(0.0, sigma, size=(n, replicates))
    resid = IH @ (r[:, None] + eps)
    aict = np.mean(resid**2, axis=0) / s2 - 1 + 2 * tr / n
    left = aict - (np.sum(eps**2, axis=0) / (n * s2) - 1)
    bias_term = float(np.sum((IH @ r) ** 2) / (n * s2))
    var_term = float(np.sum(H * H) / n)
    predicted = bias_term + var_term
    mean_left = float(np.mean(left))
    gap = abs(mean_left - predicted) / max(abs(predicted), np.finfo(float).tiny)
    return {
        "mean_left": mean_left,
        "bias_term": bias_term,
        "variance_term": var_term,
        "predicted": predicted,
        "relative_gap": float(gap),
        "variance_negligible": bool(var_term < 0.01 * max(bias_term, np.finfo(float).tiny)),
        "replicates": replicates,
        "trace": tr,
    }
