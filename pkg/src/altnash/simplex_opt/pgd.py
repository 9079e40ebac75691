from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..game_core import BimatrixGame, LambdaPair, StrategyProfile, modified_game
from . import kernels

Objective = Literal["max_regret", "sum_regret"]
StepRule = Literal["constant", "diminishing"]

_OBJECTIVES = {"max_regret": kernels.MAX_REGRET, "sum_regret": kernels.SUM_REGRET}
_STEPS = {"constant": kernels.CONSTANT, "diminishing": kernels.DIMINISHING}


@dataclass(frozen=True)
class PgdParams:
    """Settings for projected subgradient descent over the product of two simplices.

    ``step_rule="diminishing"`` uses ``eta / sqrt(t)`` as the initial trial
    step at iteration ``t``; trial steps are halved up to ``max_backtracks``
    times until a sufficient decrease is found. The run stops once the
    objective improved by less than ``tol`` over the last ``window`` iterations.
    Pieces of the regret functions (pure best responses, and the two branches
    of the max objective) within ``active_tol`` of the maximum count as active
    when the descent direction is formed.
    """

    max_iters: int = 5000
    step_rule: StepRule = "diminishing"
    eta: float = 1.0
    tol: float = 1e-7
    window: int = 25
    objective: Objective = "max_regret"
    active_tol: float = 1e-6
    max_backtracks: int = 30

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.window < 1 or self.max_backtracks < 1:
            raise ValueError("window and max_backtracks must be >= 1")
        if self.objective not in _OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.step_rule not in _STEPS:
            raise ValueError(f"unknown step rule {self.step_rule!r}")

    def replace(self, **changes) -> "PgdParams":
        from dataclasses import replace

        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class PgdResult:
    profile: StrategyProfile
    value: float
    start_value: float
    iterations: int
    converged: bool
    history: np.ndarray


def objective_value(Gp: BimatrixGame, p: StrategyProfile, objective: Objective) -> float:
    """Max or sum of the two regrets of ``p`` in the (already modified) game ``Gp``."""
    v, _, _ = kernels.objective_and_gradient(Gp.R, Gp.C, p.row, p.col, _OBJECTIVES[objective])
    return float(v)


def objective_and_gradient(Gp: BimatrixGame, x, y, objective: Objective, active_tol: float = -1.0):
    """Objective value and a subgradient ``(gx, gy)``.

    With the default negative ``active_tol`` this is the subgradient of the
    lowest-index active branch and best responses. A non-negative value gives
    the descent direction used by ``pgd_stationary`` instead.
    """
    return kernels.objective_and_gradient(Gp.R, Gp.C, x, y, _OBJECTIVES[objective], active_tol)


def _to_simplex(v: np.ndarray) -> np.ndarray:
    # kernel output is on the simplex up to rounding; re-normalize for validation
    v = np.maximum(v, 0.0)
    return v / v.sum()


def pgd_stationary(
    G: BimatrixGame,
    L: LambdaPair,
    p0: StrategyProfile,
    params: PgdParams = PgdParams(),
) -> PgdResult:
    """Descend the regret objective of ``modified_game(G, L)`` from ``p0``.

    Only steps that pass an Armijo test on the piecewise-linear model are
    taken, so the returned value never exceeds the value at ``p0``.
    Non-convergence within ``params.max_iters`` is reported through
    ``converged=False``.
    """
    p0.check(G)
    Gp = modified_game(G, L)
    x, y, value, iters, converged, hist = kernels.pgd_run(
        Gp.R,
        Gp.C,
        p0.row,
        p0.col,
        _OBJECTIVES[params.objective],
        _STEPS[params.step_rule],
        params.eta,
        params.max_iters,
        params.tol,
        params.window,
        params.active_tol,
        params.max_backtracks,
    )
    if np.array_equal(x, p0.row) and np.array_equal(y, p0.col):
        profile = p0
    else:
        profile = StrategyProfile(_to_simplex(x), _to_simplex(y))
    return PgdResult(profile, float(value), float(hist[0]), int(iters), bool(converged), hist)
