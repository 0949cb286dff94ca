"""Test regression functions on [-1, 1]^d with analytic curvature.

Each function exposes the diagonal second derivatives ``r''_jj`` and the mixed
fourth derivatives ``d^4 r / dx_j^2 dx_k^2`` needed by the asymptotic
formulas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["RegressionFunction", "CATALOG_NAMES", "get_function", "peak_profile"]

CATALOG_NAMES = ("quad_interact", "additive_peaks", "superposed_peaks", "periodic", "d10_interact")

# (weight, decay, centre offset) of the three Gaussian bumps
_PEAKS = ((0.3, 2.0, -0.5), (0.7, 4.0, 0.5), (0.5, 0.5, 0.0))
_SERIES_TERMS = 60


def peak_profile(t, order: int = 0):
    """Univariate bump profile and its derivatives up to order 2."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for weight, decay, centre in _PEAKS:
        z = t - centre
        g = weight * np.exp(-decay * z**2)
        if order == 0:
            out += g
        elif order == 1:
            out += -2 * decay * z * g
        elif order == 2:
            out += (4 * decay**2 * z**2 - 2 * decay) * g
        else:
            raise ValueError("order must be 0, 1 or 2")
    return out


def _cos_root_derivs(s: float, upto: int = 4) -> np.ndarray:
    """``phi^(m)(s)`` for ``phi(s) = cos(pi sqrt(s))``, m = 0..upto, via its power series."""
    k = np.arange(_SERIES_TERMS)
    log_fact = np.array([math.lgamma(2 * i + 1) for i in k])
    out = np.zeros(upto + 1)
    for m in range(upto + 1):
        i = k[m:]
        falling = np.array([math.prod(range(j - m + 1, j + 1)) for j in i], dtype=float)
        coef = (-(math.pi**2)) ** i.astype(float) * falling / np.exp(log_fact[m:])
        out[m] = float(np.sum(coef * s ** (i - m).astype(float)))
    return out


@dataclass(frozen=True)
class RegressionFunction:
    """A named catalog function; ``alpha`` scales the interaction where used."""

    name: str
    d: int = 2
    alpha: float = 0.0

    def __post_init__(self):
        if self.name not in CATALOG_NAMES:
            raise ValueError(f"unknown function {self.name!r}; choose from {CATALOG_NAMES}")
        if self.name == "quad_interact":
            if self.d != 2:
                raise ValueError("quad_interact is defined for d=2")
            if not 0 <= self.alpha < 1:
                raise ValueError("quad_interact needs alpha in [0, 1)")
        if self.name == "d10_interact" and self.d < 2:
            raise ValueError("d10_interact needs d >= 2")
        if self.d < 1:
            raise ValueError("d must be positive")

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        pts = np.atleast_2d(x)
        if pts.shape[-1] != self.d:
            raise ValueError(f"{self.name} expects points of dimension {self.d}")
        return pts, x.ndim == 1

    def __call__(self, x):
        pts, single = self._points(x)
        if self.name == "quad_interact":
            ratio = self.alpha / (1 - self.alpha)
            val = pts[:, 0] ** 2 + pts[:, 1] ** 2 + ratio * pts[:, 0] * pts[:, 1]
        elif self.name == "additive_peaks":
            val = 0.5 * peak_profile(pts).sum(axis=1)
        elif self.name == "superposed_peaks":
            val = np.zeros(pts.shape[0])
            for weight, decay, centre in _PEAKS:
                val += weight * np.exp(-decay * np.sum((pts - centre) ** 2, axis=1))
        elif self.name == "periodic":
            val = np.cos(np.pi * np.linalg.norm(pts, axis=1))
        else:
            val = pts[:, 0] ** 2 + self.alpha * pts[:, 0] * pts[:, 1:].sum(axis=1)
        return float(val[0]) if single else val

    def second_diag(self, x0) -> np.ndarray:
        """``d^2 r / dx_j^2`` at one point."""
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        self._points(x0)
        d = self.d
        if self.name == "quad_interact":
            return np.full(2, 2.0)
        if self.name == "d10_interact":
            out = np.zeros(d)
            out[0] = 2.0
            return out
        if self.name == "additive_peaks":
            return 0.5 * peak_profile(x0, 2)
        if self.name == "superposed_peaks":
            out = np.zeros(d)
            for weight, decay, centre in _PEAKS:
                z = x0 - centre
                g = weight * np.exp(-decay * np.sum(z**2))
                out += (4 * decay**2 * z**2 - 2 * decay) * g
            return out
        phi = _cos_root_derivs(float(x0 @ x0), 2)
        return 2 * phi[1] + 4 * x0**2 * phi[2]

    def fourth_cross(self, x0) -> np.ndarray:
        """``d^4 r / dx_j^2 dx_k^2`` at one point (diagonal set to zero)."""
        x0 = np.asarray(x0, dtype=float).reshape(-1)
        self._points(x0)
        d = self.d
        out = np.zeros((d, d))
        if self.name == "superposed_peaks":
            for weight, decay, centre in _PEAKS:
                z = x0 - centre
                g = weight * np.exp(-decay * np.sum(z**2))
                factor = 4 * decay**2 * z**2 - 2 * decay
                out += np.outer(factor, factor) * g
        elif self.name == "periodic":
            phi = _cos_root_derivs(float(x0 @ x0), 4)
            sq = x0**2
            out = 4 * phi[2] + 8 * (sq[:, None] + sq[None, :]) * phi[3] + 16 * np.outer(sq, sq) * phi[4]
        np.fill_diagonal(out, 0.0)
        return out


def get_function(name: str, d: int | None = None, alpha: float = 0.0) -> RegressionFunction:
    if d is None:
        d = 10 if name == "d10_interact" else 2
    return RegressionFunction(name, d, alpha)
