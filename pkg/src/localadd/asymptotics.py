"""Leading-order bias, variance and optimal smoothing parameters.

All formulas assume a uniform design density and a twice (bias: four times)
differentiable regression function.  With ``h = C_h w^2`` the pointwise
asymptotic MSE of the local additive estimator is

    m(w) = (a C_h^2 - b)^2 w^8 + c / (n C_h w^(d+1))

where ``a = (mu2/2) sum_j r''_jj``, ``b = (1/216) sum_{j != k} r''''_jjkk``
and ``c = 2 d mu0(K^2) sigma^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import get_kernel

__all__ = [
    "CurvatureInput",
    "AbcCoefficients",
    "DegenerateOptimumError",
    "bias_uniform",
    "variance_formula",
    "abc",
    "optimal_w",
    "optimal_Ch",
    "asymptotic_mse",
    "rate_summary",
]

_CROSS_DENOM = 216.0


class DegenerateOptimumError(ValueError):
    """The asymptotic MSE has no interior minimizer for these inputs."""


@dataclass(frozen=True)
class CurvatureInput:
    """Derivatives of the regression function at one point.

    ``fourth_cross[j, k]`` holds the mixed derivative d^4 r / dx_j^2 dx_k^2;
    its diagonal is ignored.
    """

    d: int
    second_diag: np.ndarray
    fourth_cross: np.ndarray
    sigma: float = 0.0
    kernel: str = "epanechnikov"

    def __post_init__(self):
        second = np.asarray(self.second_diag, dtype=float).reshape(-1)
        cross = np.asarray(self.fourth_cross, dtype=float)
        if second.size != self.d or cross.shape != (self.d, self.d):
            raise ValueError("derivative arrays do not match d")
        if not np.allclose(cross, cross.T, rtol=1e-10, atol=1e-12):
            raise ValueError("fourth_cross must be symmetric")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")
        object.__setattr__(self, "second_diag", second)
        object.__setattr__(self, "fourth_cross", cross)

    @property
    def mu2(self) -> float:
        return get_kernel(self.kernel).moment(2, 1)

    @property
    def mu0_sq(self) -> float:
        return get_kernel(self.kernel).moment(0, 2)

    @property
    def cross_sum(self) -> float:
        off = ~np.eye(self.d, dtype=bool)
        return float(self.fourth_cross[off].sum())


@dataclass(frozen=True)
class AbcCoefficients:
    a: float
    b: float
    c: float


def bias_uniform(cv: CurvatureInput, h, w: float) -> float:
    """Leading bias at a point for a uniform design."""
    h = np.broadcast_to(np.asarray(h, dtype=float), (cv.d,))
    smooth = 0.5 * cv.mu2 * float(np.sum(h**2 * cv.second_diag))
    return smooth - w**4 / _CROSS_DENOM * cv.cross_sum


def variance_formula(cv: CurvatureInput, n: int, w: float, h) -> float:
    """Leading variance ``2 mu0(K^2) sigma^2 sum_j 1 / (n w^(d-1) h_j)``."""
    if n < 1:
        raise ValueError("n must be positive")
    h = np.broadcast_to(np.asarray(h, dtype=float), (cv.d,))
    return float(2 * cv.mu0_sq * cv.sigma**2 * np.sum(1.0 / (n * w ** (cv.d - 1) * h)))


def abc(cv: CurvatureInput) -> AbcCoefficients:
    a = 0.5 * cv.mu2 * float(cv.second_diag.sum())
    b = cv.cross_sum / _CROSS_DENOM
    c = 2 * cv.d * cv.mu0_sq * cv.sigma**2
    return AbcCoefficients(a, b, c)


def asymptotic_mse(coef: AbcCoefficients, C_h: float, d: int, n: int, w) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    return (coef.a * C_h**2 - coef.b) ** 2 * w**8 + coef.c / (n * C_h * w ** (d + 1))


def optimal_w(coef: AbcCoefficients, C_h: float, d: int, n: int) -> float:
    """Minimizer of :func:`asymptotic_mse` over ``w`` for ``h = C_h w^2``."""
    if C_h <= 0:
        raise ValueError("C_h must be positive")
    lead = coef.a * C_h**2 - coef.b
    if lead == 0:
        raise DegenerateOptimumError("leading bias cancels for this C_h; choose another")
    expo = 1.0 / (9 + d)
    return (coef.c * (d + 1) / (8 * C_h * lead**2)) ** expo * n ** (-expo)


def optimal_Ch(coef: AbcCoefficients, d: int) -> float:
    """Ratio ``h / w^2`` minimizing the MSE at the optimal ``w``; needs ``a b < 0``."""
    if d < 2:
        raise ValueError("optimal C_h needs d >= 2")
    if coef.a * coef.b >= 0:
        raise DegenerateOptimumError("no interior optimum unless a*b < 0")
    return math.sqrt(2.0 / (d - 1) * (-coef.b / coef.a))


def rate_summary(d: int, n: int) -> dict:
    """Orders of w, h and MSE in n, and the matching local linear dimension."""
    if d < 1:
        raise ValueError("d must be positive")
    denom = 9 + d
    return {
        "w_order": n ** (-1.0 / denom),
        "h_order": n ** (-2.0 / denom),
        "mse_order": n ** (-8.0 / denom),
        "equivalent_dimension": (d + 1) / 2,
        "mse_rate_valid": bool(1 <= d <= 8),
    }
