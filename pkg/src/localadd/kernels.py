"""Compactly supported smoothing kernels and their boundary-corrected forms.

Every kernel lives on [-1, 1] and integrates to one there.  Smoothers in this
package never use the raw kernel near the edge of a domain; they use the
cut-and-normalize form, where ``K_h(u, v)`` is rescaled so that it integrates
to one over the domain in ``u`` for every centre ``v``.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, sqrt

import numpy as np
from numpy.polynomial import Polynomial
from scipy.special import gammainc, ndtr

__all__ = [
    "Kernel",
    "KERNEL_NAMES",
    "get_kernel",
    "kernel_eval",
    "kernel_moment",
    "boundary_kernel",
]

# truncated Gaussian: standard normal on [-4, 4], squeezed onto [-1, 1]
_TG_SCALE = 4.0
_TG_MASS = float(ndtr(_TG_SCALE) - ndtr(-_TG_SCALE))

_GL_NODES = 40

_POLY = {
    "epanechnikov": Polynomial([0.75, 0.0, -0.75]),
    "quartic": Polynomial([15 / 16, 0.0, -30 / 16, 0.0, 15 / 16]),
}

_ALIASES = {
    "epanechnikov": "epanechnikov",
    "epa": "epanechnikov",
    "quartic": "quartic",
    "biweight": "quartic",
    "truncated_gaussian": "truncated_gaussian",
    "tgauss": "truncated_gaussian",
}

KERNEL_NAMES = ("epanechnikov", "quartic", "truncated_gaussian")


@dataclass(frozen=True)
class Kernel:
    """A symmetric kernel supported on [-1, 1].

    Parameters
    ----------
    name : str
        One of ``epanechnikov`` (default), ``quartic`` or
        ``truncated_gaussian`` (``tgauss``).
    """

    name: str = "epanechnikov"

    def __post_init__(self):
        try:
            canonical = _ALIASES[self.name.lower()]
        except KeyError:
            raise ValueError(
                f"unknown kernel {self.name!r}; choose from {KERNEL_NAMES}"
            ) from None
        object.__setattr__(self, "name", canonical)

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        inside = np.abs(u) <= 1.0
        if self.name == "truncated_gaussian":
            val = _TG_SCALE * np.exp(-0.5 * (_TG_SCALE * u) ** 2) / (
                sqrt(2 * np.pi) * _TG_MASS
            )
        else:
            val = _POLY[self.name](u)
        return np.where(inside, val, 0.0)

    def cdf(self, u):
        """Integral of the kernel from -1 to ``u`` (clipped to [0, 1])."""
        u = np.clip(np.asarray(u, dtype=float), -1.0, 1.0)
        if self.name == "truncated_gaussian":
            return (ndtr(_TG_SCALE * u) - ndtr(-_TG_SCALE)) / _TG_MASS
        antider = _POLY[self.name].integ(lbnd=-1.0)
        return antider(u)

    @property
    def at_zero(self) -> float:
        return float(self(0.0))

    def moment(self, j: int, l: int = 1) -> float:
        """Analytic ``mu_j(K^l) = int u^j K(u)^l du`` over [-1, 1]."""
        if j not in range(5) or l not in (1, 2):
            raise ValueError(f"unsupported moment (j={j}, l={l})")
        if j % 2 == 1:
            return 0.0
        if self.name == "truncated_gaussian":
            # int_{-1}^{1} u^j exp(-a u^2) du = a^{-(j+1)/2} * lower_gamma((j+1)/2, a)
            a = 0.5 * l * _TG_SCALE**2
            s = 0.5 * (j + 1)
            coef = (_TG_SCALE / (sqrt(2 * np.pi) * _TG_MASS)) ** l
            return float(coef * a ** (-s) * gammainc(s, a) * gamma(s))
        integrand = Polynomial.basis(j) * _POLY[self.name] ** l
        antider = integrand.integ()
        return float(antider(1.0) - antider(-1.0))

    def partial_moment(self, j: int, a, b):
        """``int_a^b u^j K(u) du`` with the limits clipped to [-1, 1]."""
        a = np.clip(np.asarray(a, dtype=float), -1.0, 1.0)
        b = np.clip(np.asarray(b, dtype=float), -1.0, 1.0)
        if self.name == "truncated_gaussian":
            # smooth integrand: a fixed Gauss-Legendre rule is exact to rounding
            nodes, weights = np.polynomial.legendre.leggauss(_GL_NODES)
            half = 0.5 * (b - a)
            t = 0.5 * (b + a)[..., None] + half[..., None] * nodes
            return half * np.sum(weights * t**j * self(t), axis=-1)
        antider = (Polynomial.basis(j) * _POLY[self.name]).integ()
        return antider(b) - antider(a)

    def boundary(self, h, u, v, lo, hi):
        """Cut-and-normalize kernel ``K_h(u, v)`` on the interval [lo, hi].

        The normalizer is computed analytically from the kernel CDF, so the
        result integrates to one in ``u`` over [lo, hi] for every ``v``.
        """
        h = np.asarray(h, dtype=float)
        if np.any(h <= 0):
            raise ValueError("bandwidth must be positive")
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        mass = self.cdf((hi - v) / h) - self.cdf((lo - v) / h)
        if np.any(mass <= 0):
            raise ValueError("kernel has no mass inside the domain at this centre")
        return self((u - v) / h) / h / mass


def get_kernel(kernel) -> Kernel:
    if isinstance(kernel, Kernel):
        return kernel
    return Kernel(kernel or "epanechnikov")


def kernel_eval(kernel, u):
    return get_kernel(kernel)(u)


def kernel_moment(kernel, j: int, l: int = 1) -> float:
    return get_kernel(kernel).moment(j, l)


def boundary_kernel(kernel, h, u, v, lo=-1.0, hi=1.0):
    return get_kernel(kernel).boundary(h, u, v, lo, hi)
