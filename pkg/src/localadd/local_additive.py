"""The local additive estimator.

For an output point ``x0`` the observations inside the rectangle
``[x0 - w, x0 + w]`` (intersected with the domain) are rescaled to
``u = (X - x0) / w``, an additive smoother with bandwidths ``h / w`` is fitted
to them, and its value at ``u = 0`` is the estimate.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .sbe import get_backend

__all__ = [
    "InsufficientDataError",
    "SmoothingParams",
    "WindowSample",
    "default_n_min",
    "window_extract",
    "fit_local_additive",
    "local_additive_weights",
    "fit_local_additive_grid",
    "LocalAdditiveResult",
    "bilinear_diagnostic",
    "fit_additive",
    "additive_weights",
]


class InsufficientDataError(ValueError):
    """The window around an output point holds fewer than ``n_min`` points."""

    def __init__(self, n_tilde: int, n_min: int):
        super().__init__(f"window holds {n_tilde} observations, need at least {n_min}")
        self.n_tilde = n_tilde
        self.n_min = n_min


@dataclass(frozen=True)
class SmoothingParams:
    """Bandwidths ``h`` and window half-widths ``w`` on the original scale."""

    h: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        h = np.atleast_1d(np.asarray(self.h, dtype=float))
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        h, w = np.broadcast_arrays(h, w)
        if np.any(h <= 0) or np.any(w <= 0):
            raise ValueError("h and w must be positive")
        if np.any(h / w >= 1):
            warnings.warn(
                "rescaled bandwidth h/w >= 1: the window smoother is close to a linear fit",
                RuntimeWarning,
                stacklevel=3,
            )
        object.__setattr__(self, "h", np.array(h))
        object.__setattr__(self, "w", np.array(w))

    @classmethod
    def scalar(cls, h: float, w: float, d: int) -> "SmoothingParams":
        return cls(np.full(d, float(h)), np.full(d, float(w)))

    @property
    def h_tilde(self) -> np.ndarray:
        return self.h / self.w

    def for_dim(self, d: int) -> "SmoothingParams":
        if self.h.size == d:
            return self
        if self.h.size != 1:
            raise ValueError(f"parameters have {self.h.size} entries, data has d={d}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return SmoothingParams(np.repeat(self.h, d), np.repeat(self.w, d))


@dataclass(frozen=True)
class WindowSample:
    """Observations inside one window, rescaled to the window's unit box.

    ``lo`` and ``hi`` are the rescaled bounds of the window after clipping to
    the domain; they equal -1 and 1 for windows away from the boundary.
    """

    u: np.ndarray
    y: np.ndarray
    index: np.ndarray
    ubar: np.ndarray
    x0: np.ndarray
    w: np.ndarray
    lo: np.ndarray
    hi: np.ndarray

    @property
    def n_tilde(self) -> int:
        return self.index.size


def default_n_min(d: int) -> int:
    return max(4 * d, 20)


def window_extract(data: Dataset, x0, w, n_min: int | None = None) -> WindowSample:
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    w = np.broadcast_to(np.asarray(w, dtype=float), (data.d,))
    if x0.size != data.d:
        raise ValueError("x0 has the wrong dimension")
    if np.any(w <= 0):
        raise ValueError("window half-widths must be positive")
    if np.any(x0 < data.lo) or np.any(x0 > data.hi):
        raise ValueError("x0 lies outside the domain")
    if n_min is None:
        n_min = default_n_min(data.d)
    inside = np.all(np.abs(data.x - x0) <= w, axis=1)
    index = np.flatnonzero(inside)
    if index.size < n_min:
        raise InsufficientDataError(index.size, n_min)
    u = (data.x[index] - x0) / w
    lo = (np.maximum(data.lo, x0 - w) - x0) / w
    hi = (np.minimum(data.hi, x0 + w) - x0) / w
    # guard rounding at the clipped edges
    u = np.clip(u, lo, hi)
    ubar = u.mean(axis=0) if index.size else np.full(data.d, np.nan)
    return WindowSample(u, data.y[index], index, ubar, x0, np.array(w), lo, hi)


def _window_for(data, params, x0, n_min):
    params = params.for_dim(data.d)
    return params, window_extract(data, x0, params.w, n_min)


def fit_local_additive(
    data: Dataset, params: SmoothingParams, x0, backend="sbe-ll", n_min: int | None = None
) -> float:
    """Local additive estimate at ``x0``.

    Raises
    ------
    InsufficientDataError
        If the window holds fewer than ``n_min`` observations
        (default ``max(4d, 20)``).
    """
    backend = get_backend(backend)
    params, win = _window_for(data, params, x0, n_min)
    val = backend.predict(win.u, win.y, params.h_tilde, win.lo, win.hi, np.zeros(data.d))
    return float(np.asarray(val).reshape(-1)[0])


def local_additive_weights(
    data: Dataset, params: SmoothingParams, x0, backend="sbe-ll", n_min: int | None = None
) -> np.ndarray:
    """Length-n weights ``W`` with ``fit_local_additive(...) == W @ data.y``."""
    backend = get_backend(backend)
    params, win = _window_for(data, params, x0, n_min)
    row = backend.weights(win.u, params.h_tilde, win.lo, win.hi, np.zeros(data.d))[0]
    out = np.zeros(data.n)
    out[win.index] = row
    return out


@dataclass(frozen=True)
class LocalAdditiveResult:
    """Estimates at a list of output points; ``status`` is "ok" or a reason."""

    points: np.ndarray
    values: np.ndarray
    status: tuple

    @property
    def ok(self) -> np.ndarray:
        return np.array([s == "ok" for s in self.status])


def _output_points(outputs, data):
    if hasattr(outputs, "mesh"):
        return outputs.mesh()
    pts = np.atleast_2d(np.asarray(outputs, dtype=float))
    if pts.shape[1] != data.d:
        raise ValueError("output points have the wrong dimension")
    return pts


def fit_local_additive_grid(
    data: Dataset, params: SmoothingParams, outputs, backend="sbe-ll", n_min: int | None = None
) -> LocalAdditiveResult:
    """Apply :func:`fit_local_additive` at every output point independently.

    Points whose window is too small are reported as missing (NaN) with the
    reason in ``status``; nothing is raised.
    """
    backend = get_backend(backend)
    pts = _output_points(outputs, data)
    values = np.full(pts.shape[0], np.nan)
    status = []
    for i, p in enumerate(pts):
        try:
            values[i] = fit_local_additive(data, params, p, backend, n_min)
            status.append("ok")
        except (InsufficientDataError, ValueError) as exc:
            status.append(f"missing: {exc}")
    return LocalAdditiveResult(pts, values, tuple(status))


def bilinear_diagnostic(
    data: Dataset, w, x0, j: int, k: int, h_tilde, backend="sbe-ll", n_min: int | None = None
) -> float:
    """Additive fit of ``(u_j - mean u_j)(u_k - mean u_k)`` in the window, read at 0.

    A value near zero means the window smoother does not turn this bilinear
    interaction into spurious bias at the centre.
    """
    if j == k:
        raise ValueError("j and k must differ")
    backend = get_backend(backend)
    win = window_extract(data, x0, w, n_min)
    resp = (win.u[:, j] - win.ubar[j]) * (win.u[:, k] - win.ubar[k])
    h_tilde = np.broadcast_to(np.asarray(h_tilde, dtype=float), (data.d,))
    val = backend.predict(win.u, resp, h_tilde, win.lo, win.hi, np.zeros(data.d))
    return float(np.asarray(val).reshape(-1)[0])


def fit_additive(data: Dataset, h, points, backend="sbe-ll") -> np.ndarray:
    """Global additive fit evaluated at ``points``."""
    backend = get_backend(backend)
    h = np.broadcast_to(np.asarray(h, dtype=float), (data.d,))
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    out = backend.predict(data.x, data.y, h, data.lo, data.hi, pts)
    return np.asarray(out).reshape(-1)


def additive_weights(data: Dataset, h, points, backend="sbe-ll") -> np.ndarray:
    backend = get_backend(backend)
    h = np.broadcast_to(np.asarray(h, dtype=float), (data.d,))
    return backend.weights(data.x, h, data.lo, data.hi, np.atleast_2d(points))
