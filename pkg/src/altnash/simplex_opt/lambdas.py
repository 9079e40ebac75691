"""Optimal behaviour parameters for a fixed strategy profile.

At fixed ``(x, y)`` the row regret in the modified game is the upper envelope
of the lines ``a_i + b_i * lambda_r`` and the column regret the envelope of
``a_j + b_j * lambda_c``. Both objectives separate per player, so each player's
parameter is the minimizer of a convex 1-D envelope over [-1, 1], found
exactly among the pairwise line intersections and the two endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..game_core import BimatrixGame, LambdaPair, StrategyProfile

TIE_TOL = 1e-12


@dataclass(frozen=True)
class LambdaOptResult:
    lambdas: LambdaPair
    gamma: float


def regret_lines(G: BimatrixGame, p: StrategyProfile) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Intercepts and slopes of both players' regret lines at fixed ``p``."""
    p.check(G)
    x, y = p.row, p.col
    Ry, Cy = G.R @ y, G.C @ y
    xR, xC = x @ G.R, x @ G.C
    xRy, xCy = float(x @ Ry), float(x @ Cy)
    return Ry - xRy, Cy - xCy, xC - xCy, xR - xRy


def envelope_minimum(a: np.ndarray, b: np.ndarray) -> Tuple[float, float]:
    """Minimize ``max_k a[k] + b[k] * t`` over ``t`` in [-1, 1].

    Returns ``(t, value)``; among minimizers the smallest ``t`` wins.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    k, l = np.triu_indices(a.size, 1)
    db = b[k] - b[l]
    ok = db != 0
    cross = (a[l][ok] - a[k][ok]) / db[ok]
    cand = np.concatenate(([-1.0, 1.0], cross[(cross > -1.0) & (cross < 1.0)]))
    cand = np.unique(cand)  # sorted ascending
    vals = (a[:, None] + b[:, None] * cand[None, :]).max(axis=0)
    best = vals.min()
    idx = int(np.nonzero(vals <= best + TIE_TOL)[0][0])
    return float(cand[idx]), max(float(vals[idx]), 0.0)


def optimal_lambdas(G: BimatrixGame, p: StrategyProfile, objective: str = "max_regret") -> LambdaOptResult:
    """Behaviour pair in [-1, 1]^2 minimizing the max or sum of regrets at ``p``."""
    ar, br, ac, bc = regret_lines(G, p)
    lr, fr = envelope_minimum(ar, br)
    lc, fc = envelope_minimum(ac, bc)
    if objective == "max_regret":
        gamma = max(fr, fc)
    elif objective == "sum_regret":
        gamma = fr + fc
    else:
        raise ValueError(f"unknown objective {objective!r}")
    return LambdaOptResult(LambdaPair(lr, lc), gamma)
