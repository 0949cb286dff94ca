"""Local additive nonparametric regression.

An additive smoother is fitted inside a rectangular window around each output
point and read off at the window centre.  Small windows behave like a local
linear fit, the full window gives a global additive fit.
"""
from .asymptotics import (
    AbcCoefficients,
    CurvatureInput,
    abc,
    asymptotic_mse,
    bias_uniform,
    optimal_Ch,
    optimal_w,
    rate_summary,
    variance_formula,
)
from .data import Dataset
from .kernels import Kernel, get_kernel
from .local_additive import (
    InsufficientDataError,
    SmoothingParams,
    bilinear_diagnostic,
    fit_additive,
    fit_local_additive,
    fit_local_additive_grid,
    window_extract,
)
from .local_linear import DegenerateFitError, fit_local_linear
from .sbe import EvalGrid, SBEBackend, fit_sbe, get_backend
from .selection import criterion_eval, select_params, trace_exact, trace_plugin

__version__ = "0.1.0"

__all__ = [
    "AbcCoefficients",
    "CurvatureInput",
    "Dataset",
    "DegenerateFitError",
    "EvalGrid",
    "InsufficientDataError",
    "Kernel",
    "SBEBackend",
    "SmoothingParams",
    "abc",
    "asymptotic_mse",
    "bias_uniform",
    "bilinear_diagnostic",
    "criterion_eval",
    "fit_additive",
    "fit_local_additive",
    "fit_local_additive_grid",
    "fit_local_linear",
    "fit_sbe",
    "get_backend",
    "get_kernel",
    "optimal_Ch",
    "optimal_w",
    "rate_summary",
    "select_params",
    "trace_exact",
    "trace_plugin",
    "variance_formula",
    "window_extract",
]
