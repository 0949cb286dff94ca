"""Regression samples on a rectangular domain."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["Dataset", "as_bounds"]


def as_bounds(value, d: int) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (d,)).copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Dataset:
    """Design matrix ``x`` (n x d) and response ``y`` on the box [lo, hi]^d.

    ``lo`` and ``hi`` may be scalars or per-coordinate arrays.
    """

    x: np.ndarray
    y: np.ndarray
    lo: np.ndarray = field(default=-1.0)
    hi: np.ndarray = field(default=1.0)

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        y = np.array(self.y, dtype=float).reshape(-1)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise ValueError("x must be a non-empty n x d matrix")
        if y.shape[0] != x.shape[0]:
            raise ValueError(f"x has {x.shape[0]} rows but y has {y.shape[0]} entries")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        d = x.shape[1]
        lo = as_bounds(self.lo, d)
        hi = as_bounds(self.hi, d)
        if np.any(hi <= lo):
            raise ValueError("domain bounds must satisfy lo < hi")
        tol = 1e-12 * (hi - lo)
        if np.any(x < lo - tol) or np.any(x > hi + tol):
            raise ValueError("design points fall outside the domain")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d(self) -> int:
        return self.x.shape[1]

    @property
    def bounds(self) -> np.ndarray:
        return np.column_stack([self.lo, self.hi])

    def with_y(self, y) -> "Dataset":
        return Dataset(self.x, y, self.lo, self.hi)
