"""Numerical engines: simplex projection, projected descent, the behaviour LP and a dense simplex."""

import numpy as np

from . import kernels
from .lambdas import LambdaOptResult, envelope_minimum, optimal_lambdas, regret_lines
from .lp import NumericalError, simplex_max, zero_sum_ne
from .pgd import PgdParams, PgdResult, objective_and_gradient, objective_value, pgd_stationary


def project_simplex(v) -> np.ndarray:
    """Euclidean projection of ``v`` onto the probability simplex (sort-and-threshold)."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValueError("project_simplex needs a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("project_simplex needs finite entries")
    return kernels.project_simplex_raw(v)


__all__ = [
    "LambdaOptResult",
    "NumericalError",
    "PgdParams",
    "PgdResult",
    "envelope_minimum",
    "kernels",
    "objective_and_gradient",
    "objective_value",
    "optimal_lambdas",
    "pgd_stationary",
    "project_simplex",
    "regret_lines",
    "simplex_max",
    "zero_sum_ne",
]
