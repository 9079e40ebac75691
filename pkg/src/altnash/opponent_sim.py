"""Opponent modeling: behaviour-type strategies, empirical inference, selection and transfer."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Hashable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .game_core import BimatrixGame, LambdaPair, StrategyProfile, modified_game
from .simplex_opt import PgdParams, pgd_stationary
from .sweep_lab import DEFAULT_GRID, random_gaussian, random_softmax_profile

TYPE_PARAMS = PgdParams(objective="sum_regret")
TYPE_SEED = 0
TIE_TOL = 1e-12


# -- behaviour-type strategies ---------------------------------------------------

@lru_cache(maxsize=4096)
def _type_profile(G: BimatrixGame, lambda_row: float, lambda_col: float, params: PgdParams, seed: int) -> StrategyProfile:
    p0 = random_softmax_profile(G.n_rows, G.n_cols, np.random.default_rng(seed))
    return pgd_stationary(G, LambdaPair(lambda_row, lambda_col), p0, params).profile


def type_profile(
    G: BimatrixGame,
    lambda_self: float,
    lambda_opponent: float,
    params: PgdParams = TYPE_PARAMS,
    seed: int = TYPE_SEED,
) -> StrategyProfile:
    """Profile both players settle on when the row player (self) and the column
    player (opponent) know each other's behaviour.

    Descends the sum-of-regrets objective from a softmax start drawn with
    ``seed``. The start does not depend on the lambdas, and results are cached
    per ``(game, lambdas, params, seed)``, so repeated calls agree exactly.
    """
    return _type_profile(G, float(lambda_self), float(lambda_opponent), params, int(seed))


def type_strategy(
    G: BimatrixGame,
    lambda_self: float,
    lambda_opponent: float,
    params: PgdParams = TYPE_PARAMS,
    seed: int = TYPE_SEED,
) -> np.ndarray:
    """Mixed strategy of a column opponent of type ``lambda_opponent`` facing ``lambda_self``."""
    return type_profile(G, lambda_self, lambda_opponent, params, seed).col


def clear_type_cache() -> None:
    _type_profile.cache_clear()


# -- observation -------------------------------------------------------------------

@dataclass(frozen=True)
class AgentSpec:
    id: Hashable
    lam: float
    strategy: Optional[np.ndarray] = None

    def __post_init__(self):
        if not -1.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda {self.lam} outside [-1, 1]")
        if self.strategy is not None:
            s = np.asarray(self.strategy, dtype=float)
            if np.any(s < -1e-9) or abs(s.sum() - 1.0) > 1e-9:
                raise ValueError("agent strategy must be a probability vector")

    def strategy_in(self, G: BimatrixGame, learner_lambda: float, params: PgdParams = TYPE_PARAMS) -> np.ndarray:
        if self.strategy is not None:
            return np.asarray(self.strategy, dtype=float)
        return type_strategy(G, learner_lambda, self.lam, params)


@dataclass
class OpponentModel:
    """Action counts of one opponent, optionally blended with prior pseudo-counts."""

    counts: np.ndarray
    prior: Optional[np.ndarray] = None
    prior_weight: float = 0.0
    lambda_hat: Optional[float] = None
    reward_sum: float = 0.0

    @classmethod
    def empty(cls, n_actions: int) -> "OpponentModel":
        return cls(np.zeros(n_actions, dtype=np.int64))

    @classmethod
    def with_prior(cls, prior, weight: float) -> "OpponentModel":
        prior = np.asarray(prior, dtype=float)
        if weight < 0:
            raise ValueError("prior weight must be non-negative")
        return cls(np.zeros(prior.size, dtype=np.int64), prior.copy(), float(weight))

    @property
    def rounds_observed(self) -> int:
        return int(self.counts.sum())

    @property
    def empirical(self) -> np.ndarray:
        """Observed frequencies mixed with the prior; uniform when nothing is known."""
        total = self.rounds_observed + (self.prior_weight if self.prior is not None else 0.0)
        if total <= 0:
            return np.full(self.counts.size, 1.0 / self.counts.size)
        v = self.counts.astype(float)
        if self.prior is not None:
            v = v + self.prior_weight * self.prior
        return v / total

    @property
    def mean_reward(self) -> float:
        n = self.rounds_observed
        return self.reward_sum / n if n else 0.0

    def observe(self, actions: np.ndarray) -> None:
        self.counts += np.bincount(np.asarray(actions, dtype=np.int64), minlength=self.counts.size)


def repeated_play(
    G: BimatrixGame,
    learner_lambda: float,
    opponent: AgentSpec,
    rounds: int,
    rng: np.random.Generator,
    model: Optional[OpponentModel] = None,
    params: PgdParams = TYPE_PARAMS,
) -> OpponentModel:
    """Let the learner (row, uniform random actions) watch ``rounds`` plays of ``opponent``.

    The opponent samples from its fixed strategy every round. The learner's
    base-game payoffs are accumulated in ``reward_sum``.
    """
    if rounds < 1:
        raise ValueError("rounds must be >= 1")
    y = opponent.strategy_in(G, learner_lambda, params)
    if model is None:
        model = OpponentModel.empty(G.n_cols)
    opp = rng.choice(G.n_cols, size=rounds, p=y)
    own = rng.integers(0, G.n_rows, size=rounds)
    model.observe(opp)
    model.reward_sum += float(G.R[own, opp].sum())
    return model


# -- inference and selection ------------------------------------------------------

@dataclass(frozen=True)
class Inference:
    lambda_hat: float
    distance: float
    tied: Tuple[float, ...]

    @property
    def identifiable(self) -> bool:
        return len(self.tied) == 1


def infer_lambda_detail(
    empirical,
    G: BimatrixGame,
    learner_lambda: float = 0.0,
    grid: Sequence[float] = DEFAULT_GRID,
    params: PgdParams = TYPE_PARAMS,
) -> Inference:
    if len(grid) == 0:
        raise ValueError("grid must not be empty")
    yhat = np.asarray(empirical, dtype=float)
    lams = sorted(float(v) for v in grid)
    dist = np.array([np.abs(type_strategy(G, learner_lambda, lam, params) - yhat).sum() for lam in lams])
    best = float(dist.min())
    tied = tuple(lam for lam, d in zip(lams, dist) if d <= best + TIE_TOL)
    return Inference(tied[0], best, tied)


def infer_lambda(
    model: OpponentModel,
    G: BimatrixGame,
    learner_lambda: float = 0.0,
    grid: Sequence[float] = DEFAULT_GRID,
    params: PgdParams = TYPE_PARAMS,
) -> float:
    """Grid type whose strategy is L1-closest to the model's empirical play; ties go to the smallest."""
    if model.rounds_observed < 1 and model.prior is None:
        raise ValueError("the model has no observations")
    inf = infer_lambda_detail(model.empirical, G, learner_lambda, grid, params)
    model.lambda_hat = inf.lambda_hat
    return inf.lambda_hat


def expected_reward(G: BimatrixGame, learner_lambda: float, lambda_hat: float, params: PgdParams = TYPE_PARAMS) -> float:
    """Row payoff ``x^T R y`` of the profile the two types settle on."""
    p = type_profile(G, learner_lambda, lambda_hat, params)
    return float(p.row @ G.R @ p.col)


def select_opponent(
    G: BimatrixGame,
    learner_lambda: float,
    estimates: Sequence[Tuple[Any, float]],
    params: PgdParams = TYPE_PARAMS,
) -> Any:
    """Candidate id with the highest predicted reward; ties go to the smallest id."""
    if not estimates:
        raise ValueError("no candidates")
    scored = [(expected_reward(G, learner_lambda, lam, params), cid) for cid, lam in estimates]
    top = max(s for s, _ in scored)
    return min(cid for s, cid in scored if s >= top - TIE_TOL)


# -- knowledge transfer ---------------------------------------------------------

@dataclass(frozen=True)
class TransferPayoffs:
    profile: StrategyProfile
    row_payoff: float
    col_payoff: float
    modified_payoffs: Tuple[float, float]


def knowledge_transfer_best_response(
    G: BimatrixGame,
    learned_lambda_c: float,
    params: PgdParams = TYPE_PARAMS,
) -> TransferPayoffs:
    """Row player (behaviour 0) best-responds to the column player's strategy in
    ``(R, C + learned_lambda_c * R)``.

    The opponent strategy is the column part of ``type_profile(G, 0, lambda)``;
    the row reply is the lowest-index pure best response. Payoffs are reported
    in the base game and in the modified game.
    """
    y = type_profile(G, 0.0, learned_lambda_c, params).col
    i = int(np.argmax(G.R @ y))
    x = np.zeros(G.n_rows)
    x[i] = 1.0
    p = StrategyProfile(x, y)
    Gp = modified_game(G, LambdaPair(0.0, learned_lambda_c))
    return TransferPayoffs(
        p,
        float(x @ G.R @ y),
        float(x @ G.C @ y),
        (float(x @ Gp.R @ y), float(x @ Gp.C @ y)),
    )


# -- experiments ---------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceRule:
    """Recompute the estimate every ``every`` rounds; stop once the last
    ``windows`` estimates agree, or after ``max_rounds``."""

    every: int = 10
    windows: int = 5
    max_rounds: int = 100_000


@dataclass(frozen=True)
class PathResult:
    rounds: int
    lambda_hat: float
    converged: bool
    identifiable: bool


def _observe_until_stable(
    G: BimatrixGame,
    y_true: np.ndarray,
    model: OpponentModel,
    rng: np.random.Generator,
    learner_lambda: float,
    grid: Sequence[float],
    rule: ConvergenceRule,
    params: PgdParams,
) -> PathResult:
    history: List[float] = []
    inf = None
    if model.prior is not None:
        # an informed prior already yields an estimate before any play
        inf = infer_lambda_detail(model.empirical, G, learner_lambda, grid, params)
        history.append(inf.lambda_hat)
    rounds = 0
    while rounds < rule.max_rounds:
        if len(history) >= rule.windows and len(set(history[-rule.windows:])) == 1:
            return PathResult(rounds, history[-1], True, inf.identifiable)
        model.observe(rng.choice(G.n_cols, size=rule.every, p=y_true))
        rounds += rule.every
        inf = infer_lambda_detail(model.empirical, G, learner_lambda, grid, params)
        history.append(inf.lambda_hat)
    return PathResult(rounds, history[-1], False, inf.identifiable)


@dataclass(frozen=True)
class TransferResult:
    warm_rounds: int
    cold_rounds: int
    lambda_hat_warm: float
    lambda_hat_cold: float
    lambda_hat_prior: float
    warm: PathResult
    cold: PathResult
    x_rounds: int

    @property
    def warm_total(self) -> int:
        return self.x_rounds + self.warm_rounds


def transfer_experiment(
    gameA: BimatrixGame,
    gameB: BimatrixGame,
    true_lambda_j: float,
    x_rounds: int,
    rng: np.random.Generator,
    learner_lambda: float = 0.0,
    grid: Sequence[float] = DEFAULT_GRID,
    rule: ConvergenceRule = ConvergenceRule(),
    prior_weight: float = 50.0,
    params: PgdParams = TYPE_PARAMS,
) -> TransferResult:
    """Compare inference in game B with and without a prior learned in game A.

    Warm path: watch ``x_rounds`` plays in A, infer a type there, and seed the
    model for B with that type's strategy in B as ``prior_weight``
    pseudo-observations. Cold path: start from nothing in B. Both paths stop
    by ``rule``. ``warm_rounds`` counts rounds in B only; see ``warm_total``.
    """
    if x_rounds < 1:
        raise ValueError("x_rounds must be >= 1")
    yA = type_strategy(gameA, learner_lambda, true_lambda_j, params)
    yB = type_strategy(gameB, learner_lambda, true_lambda_j, params)
    mA = OpponentModel.empty(gameA.n_cols)
    mA.observe(rng.choice(gameA.n_cols, size=x_rounds, p=yA))
    prior_lam = infer_lambda(mA, gameA, learner_lambda, grid, params)
    prior = type_strategy(gameB, learner_lambda, prior_lam, params)
    warm = _observe_until_stable(
        gameB, yB, OpponentModel.with_prior(prior, prior_weight), rng, learner_lambda, grid, rule, params
    )
    cold = _observe_until_stable(
        gameB, yB, OpponentModel.empty(gameB.n_cols), rng, learner_lambda, grid, rule, params
    )
    return TransferResult(warm.rounds, cold.rounds, warm.lambda_hat, cold.lambda_hat, prior_lam, warm, cold, x_rounds)


def transfer_games(seed: int, n_a: int = 3, n_b: int = 10, sigma: float = 0.2) -> Tuple[BimatrixGame, BimatrixGame]:
    """Small game A and large game B, symmetric with N(0.5, sigma^2) entries."""
    ss = np.random.SeedSequence([seed, 0xA])
    sa, sb = ss.generate_state(2)
    A = random_gaussian(n_a, 0.5, sigma**2, True, int(sa))
    B = random_gaussian(n_b, 0.5, sigma**2, True, int(sb))
    return A, B


@dataclass(frozen=True)
class OpponentRecord:
    opponent_id: int
    lambda_true: float
    lambda_hat: float
    rounds: int
    l1_distance: float
    mean_reward: float


@dataclass(frozen=True)
class SelectionReport:
    records: Tuple[OpponentRecord, ...]
    selected: int
    training_reward: float
    eval_selected: float
    eval_spiteful: float
    eval_altruistic: float
    extra: Dict[str, Any] = field(default_factory=dict)


def opponent_selection_experiment(
    seed: int = 0,
    n_opponents: int = 100,
    n_actions: int = 15,
    rounds: int = 10_000,
    lambdas: Optional[Sequence[float]] = None,
    grid: Sequence[float] = DEFAULT_GRID,
    params: PgdParams = TYPE_PARAMS,
) -> Tuple[BimatrixGame, SelectionReport]:
    """Training, inference and selection against a pool of typed opponents.

    The learner has behaviour 0. Opponent types are drawn uniformly from
    [-1, 1] unless ``lambdas`` is given. Evaluation rewards use the learner's
    strategy predicted for the inferred type against the opponent's true
    strategy.
    """
    ss = np.random.SeedSequence(seed)
    game_seed, lam_seed, play_seed = (int(s) for s in ss.generate_state(3))
    G = random_gaussian(n_actions, 0.5, 0.2, True, game_seed)
    if lambdas is None:
        lambdas = np.random.default_rng(lam_seed).uniform(-1.0, 1.0, n_opponents)
    play_streams = np.random.SeedSequence(play_seed).spawn(len(lambdas))
    records = []
    rewards = {}
    total_reward = 0.0
    total_rounds = 0
    for k, (lam, stream) in enumerate(zip(lambdas, play_streams)):
        agent = AgentSpec(k, float(lam))
        y = agent.strategy_in(G, 0.0, params)
        model = repeated_play(G, 0.0, agent, rounds, np.random.default_rng(stream), params=params)
        lam_hat = infer_lambda(model, G, 0.0, grid, params)
        x = type_profile(G, 0.0, lam_hat, params).row
        rewards[k] = float(x @ G.R @ y)
        total_reward += model.reward_sum
        total_rounds += model.rounds_observed
        records.append(
            OpponentRecord(k, float(lam), lam_hat, rounds, float(np.abs(model.empirical - y).sum()), model.mean_reward)
        )
    selected = select_opponent(G, 0.0, [(r.opponent_id, r.lambda_hat) for r in records], params)

    def _mean(ids):
        vals = [rewards[i] for i in ids]
        return float(np.mean(vals)) if vals else float("nan")

    report = SelectionReport(
        tuple(records),
        selected,
        total_reward / total_rounds,
        rewards[selected],
        _mean([r.opponent_id for r in records if r.lambda_true < -0.5]),
        _mean([r.opponent_id for r in records if r.lambda_true > 0.5]),
    )
    return G, report


def write_opponent_csv(records: Sequence[OpponentRecord], path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["opponent_id", "lambda_true", "lambda_hat", "rounds", "l1_distance"])
            for r in records:
                w.writerow([r.opponent_id, f"{r.lambda_true:.12g}", f"{r.lambda_hat:.1f}", r.rounds, f"{r.l1_distance:.12g}"])
    except OSError as exc:
        raise OSError(f"cannot write opponent report {path}: {exc}") from exc


def write_transfer_csv(res: TransferResult, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["path", "rounds", "lambda_hat"])
            w.writerow(["warm", res.warm_total, f"{res.lambda_hat_warm:.1f}"])
            w.writerow(["cold", res.cold_rounds, f"{res.lambda_hat_cold:.1f}"])
    except OSError as exc:
        raise OSError(f"cannot write transfer report {path}: {exc}") from exc
