"""Approximate Nash equilibria of bimatrix games whose players are altruistic or spiteful."""

from .game_core import (
    BimatrixGame,
    DimensionError,
    GameFormatError,
    LambdaPair,
    RegretReport,
    ScaleInfo,
    StrategyProfile,
    evaluate,
    load_game,
    modified_game,
    normalize_game,
    pure_social_optimum,
    regret_col,
    regret_row,
    regrets,
    save_game,
    verify_reduction_identity,
)
from .simplex_opt import PgdParams, optimal_lambdas, pgd_stationary, project_simplex, zero_sum_ne
from .simplex_opt.kernels import BACKEND

__version__ = "0.1.0"
