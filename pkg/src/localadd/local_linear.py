"""Multivariate local linear regression with boundary-corrected product kernels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .data import Dataset
from .kernels import get_kernel

__all__ = [
    "DegenerateFitError",
    "LocalLinearFit",
    "product_weights",
    "fit_local_linear",
    "hat_weights_local_linear",
    "local_linear_weights",
]

_SINGULAR = 1e-14
_ILL_CONDITIONED = 1e-10


class DegenerateFitError(ValueError):
    """Too few points with positive weight, or a singular weighted design."""


@dataclass(frozen=True)
class LocalLinearFit:
    value: float
    gradient: np.ndarray
    effective_n: int
    ridged: bool = False


def product_weights(data: Dataset, h, x0, kernel="epanechnikov") -> np.ndarray:
    """``prod_j K_{h_j}(x0_j, X_ij)`` with per-coordinate boundary normalization."""
    kern = get_kernel(kernel)
    h = np.broadcast_to(np.asarray(h, dtype=float), (data.d,))
    if np.any(h <= 0):
        raise ValueError("bandwidths must be positive")
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.size != data.d:
        raise ValueError("x0 has the wrong dimension")
    if np.any(x0 < data.lo) or np.any(x0 > data.hi):
        raise ValueError("x0 lies outside the domain")
    wts = np.ones(data.n)
    for j in range(data.d):
        wts *= kern.boundary(h[j], x0[j], data.x[:, j], data.lo[j], data.hi[j])
    return wts


def _smoother_row(data, h, x0, kernel):
    """First row of the weighted least-squares solution map, plus its normal matrix."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    wts = product_weights(data, h, x0, kernel)
    active = np.flatnonzero(wts > 0)
    d = data.d
    if active.size < d + 1:
        raise DegenerateFitError(
            f"only {active.size} observations with positive weight; need {d + 1}"
        )
    Z = np.column_stack([np.ones(active.size), data.x[active] - x0])
    wa = wts[active]
    M = Z.T @ (wa[:, None] * Z)
    scale = np.sqrt(np.diag(M))
    Ms = M / np.outer(scale, scale)
    ev = linalg.eigvalsh(Ms)
    if ev[0] <= _SINGULAR * ev[-1]:
        raise DegenerateFitError("weighted design matrix is rank deficient")
    ridged = bool(ev[0] <= _ILL_CONDITIONED * ev[-1])
    if ridged:
        M = M + 1e-12 * np.trace(M) * np.eye(d + 1)
    coef = linalg.cho_solve(linalg.cho_factor(M), (Z * wa[:, None]).T)
    return active, coef, ridged


def fit_local_linear(data: Dataset, h, x0, kernel="epanechnikov") -> LocalLinearFit:
    """Local linear fit at ``x0``: minimize sum_i w_i (y_i - a - b'(X_i - x0))^2.

    Raises
    ------
    DegenerateFitError
        If fewer than d + 1 observations get positive weight or the weighted
        design is singular.
    """
    active, coef, ridged = _smoother_row(data, h, x0, kernel)
    beta = coef @ data.y[active]
    return LocalLinearFit(float(beta[0]), np.array(beta[1:]), int(active.size), ridged)


def hat_weights_local_linear(data: Dataset, h, x0, kernel="epanechnikov") -> np.ndarray:
    active, coef, _ = _smoother_row(data, h, x0, kernel)
    out = np.zeros(data.n)
    out[active] = coef[0]
    return out


def local_linear_weights(data: Dataset, h, points, kernel="epanechnikov"):
    """Smoother rows at many points.

    Returns ``(W, ok)``; rows where the fit is degenerate are zero and flagged
    False in ``ok``.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    W = np.zeros((points.shape[0], data.n))
    ok = np.ones(points.shape[0], dtype=bool)
    for i, p in enumerate(points):
        try:
            W[i] = hat_weights_local_linear(data, h, p, kernel)
        except DegenerateFitError:
            ok[i] = False
    return W, ok
