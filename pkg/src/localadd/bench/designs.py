"""Design generators on [-1, 1]^d and additive noise."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["DESIGN_KINDS", "DesignSpec", "gen_design", "gaussian_noise", "draw_noise"]

DESIGN_KINDS = ("random_uniform", "fixed_equidistant", "jittered", "linear_skewed")


@dataclass(frozen=True)
class DesignSpec:
    """How to place ``n`` design points in [-1, 1]^d.

    ``beta`` is the slope of the per-coordinate density ``(1 + beta x) / 2``
    used by ``linear_skewed``.
    """

    kind: str = "random_uniform"
    n: int = 400
    d: int = 2
    seed: int = 0
    beta: float = 0.5

    def __post_init__(self):
        if self.kind not in DESIGN_KINDS:
            raise ValueError(f"unknown design {self.kind!r}; choose from {DESIGN_KINDS}")
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        if not -1 <= self.beta <= 1:
            raise ValueError("beta must lie in [-1, 1] for a valid density")

    def side(self) -> int:
        """Points per axis of the regular lattice (equidistant and jittered designs)."""
        m = int(round(self.n ** (1.0 / self.d)))
        for cand in (m - 1, m, m + 1):
            if cand >= 1 and cand**self.d == self.n:
                return cand
        raise ValueError(f"n={self.n} is not a perfect {self.d}-th power")


def _lattice(m: int, d: int) -> np.ndarray:
    axis = np.linspace(-1.0, 1.0, m) if m > 1 else np.zeros(1)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.column_stack([g.ravel() for g in mesh])


def _skewed_quantile(u, beta):
    # inverse CDF of (1 + beta x)/2 on [-1, 1], written to stay stable as beta -> 0
    return (4 * u - 2 + beta) / (1 + np.sqrt(1 - beta * (2 - beta - 4 * u)))


def gen_design(spec: DesignSpec) -> np.ndarray:
    """Design matrix (n x d); deterministic given ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "fixed_equidistant":
        return _lattice(spec.side(), spec.d)
    if spec.kind == "jittered":
        m = spec.side()
        cell = 2.0 / m
        centres = _lattice(m, spec.d) * (1 - 1.0 / m) if m > 1 else _lattice(1, spec.d)
        return centres + rng.uniform(-cell / 2, cell / 2, size=centres.shape)
    u = rng.random((spec.n, spec.d))
    if spec.kind == "random_uniform":
        return 2 * u - 1
    return np.clip(_skewed_quantile(u, spec.beta), -1.0, 1.0)


def gaussian_noise(rng: np.random.Generator, sigma: float, size) -> np.ndarray:
    return rng.normal(0.0, sigma, size=size)


def draw_noise(
    rng: np.random.Generator,
    sigma: float,
    size,
    noise: Callable[[np.random.Generator, float, tuple], np.ndarray] | None = None,
) -> np.ndarray:
    """Noise draws from ``noise(rng, sigma, size)``; Gaussian by default."""
    return (noise or gaussian_noise)(rng, sigma, size)
