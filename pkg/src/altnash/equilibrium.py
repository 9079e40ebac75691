"""Constructive equilibria under shared altruism or spite, and alternating optimization."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from .game_core import (
    ATOL,
    BimatrixGame,
    LambdaPair,
    RegretReport,
    StrategyProfile,
    evaluate,
    modified_game,
    pure_social_optimum,
)
from .simplex_opt import PgdParams, objective_value, optimal_lambdas, pgd_stationary, zero_sum_ne

EARLY_STOP = 1e-8


def _require_normalized(G: BimatrixGame) -> None:
    lo = min(G.R.min(), G.C.min())
    hi = max(G.R.max(), G.C.max())
    if lo < -ATOL or hi > 1.0 + ATOL:
        raise ValueError("the game must be normalized to [0, 1] first (see normalize_game)")


def altruism_social_opt_ne(G: BimatrixGame, lam: float) -> Tuple[StrategyProfile, RegretReport]:
    """Pure social optimum of the game where both players have altruism ``lam``.

    For a normalized game and ``0 < lam <= 1`` this profile is a
    ``(1 - lam)``-approximate equilibrium of the modified game.
    """
    lam = float(lam)
    if not 0.0 < lam <= 1.0:
        raise ValueError(f"altruism level must lie in (0, 1], got {lam}")
    _require_normalized(G)
    L = LambdaPair(lam, lam)
    i, j = pure_social_optimum(modified_game(G, L))
    p = StrategyProfile.pure(i, j, G.n_rows, G.n_cols)
    return p, evaluate(G, L, p)


def spite_zero_sum_ne(G: BimatrixGame, lam: float) -> Tuple[StrategyProfile, RegretReport]:
    """Minimax profile of ``(R - C, C - R)`` evaluated with shared spite ``lam``.

    For a normalized game and ``-1 <= lam < 0`` it is a ``(1 + lam)``-approximate
    equilibrium of the modified game.
    """
    lam = float(lam)
    if not -1.0 <= lam < 0.0:
        raise ValueError(f"spite level must lie in [-1, 0), got {lam}")
    _require_normalized(G)
    p, _ = zero_sum_ne(G.R - G.C)
    return p, evaluate(G, LambdaPair(lam, lam), p)


@dataclass(frozen=True)
class TrajectoryStep:
    t: int
    profile: StrategyProfile
    lambdas: LambdaPair
    regret: float


@dataclass(frozen=True)
class Trajectory:
    steps: Tuple[TrajectoryStep, ...]
    converged: bool
    objective: str

    @property
    def final(self) -> TrajectoryStep:
        return self.steps[-1]

    @property
    def regrets(self) -> np.ndarray:
        return np.array([s.regret for s in self.steps])

    def is_monotone(self, tol: float = 1e-9) -> bool:
        r = self.regrets
        return bool(np.all(np.diff(r) <= tol))

    def to_csv(self, path: Union[str, Path]) -> None:
        write_trajectory_csv(self, path)


def alternating_optimization(
    G: BimatrixGame,
    p0: StrategyProfile,
    L0: LambdaPair = LambdaPair(),
    h: int = 100,
    params: PgdParams = PgdParams(),
    early_stop: bool = True,
) -> Trajectory:
    """Alternate descent on the profile at fixed behaviour with the exact behaviour LP.

    Step 0 records ``p0`` at ``L0``. Each later step warm-starts the descent
    from the previous profile under the previous behaviour pair, then replaces
    the behaviour by the optimum of the LP at the new profile. The recorded
    regret is the selected objective in the resulting modified game, so the
    sequence cannot increase. With ``early_stop`` the loop ends once an
    iteration gains less than 1e-8; otherwise all ``h`` iterations run.
    """
    if h < 1:
        raise ValueError("h must be >= 1")
    p0.check(G)
    obj = params.objective
    r = objective_value(modified_game(G, L0), p0, obj)
    steps: List[TrajectoryStep] = [TrajectoryStep(0, p0, L0, r)]
    p, L = p0, L0
    converged = r <= 0.0
    t = 0
    while t < h and not (early_stop and converged):
        t += 1
        p = pgd_stationary(G, L, p, params).profile
        L = optimal_lambdas(G, p, obj).lambdas
        r_new = objective_value(modified_game(G, L), p, obj)
        steps.append(TrajectoryStep(t, p, L, r_new))
        converged = r - r_new < EARLY_STOP
        r = r_new
    return Trajectory(tuple(steps), bool(converged), obj)


def write_trajectory_csv(traj: Trajectory, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "lambda_r", "lambda_c", "regret"])
            for s in traj.steps:
                w.writerow([s.t, f"{s.lambdas.lambda_r:.12g}", f"{s.lambdas.lambda_c:.12g}", f"{s.regret:.12g}"])
    except OSError as exc:
        raise OSError(f"cannot write trajectory to {path}: {exc}") from exc


def read_trajectory_csv(path: Union[str, Path]) -> List[Tuple[int, float, float, float]]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(int(r["t"]), float(r["lambda_r"]), float(r["lambda_c"]), float(r["regret"])) for r in rows]
