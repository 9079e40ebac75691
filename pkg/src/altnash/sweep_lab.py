"""Game catalog and behaviour-grid sweeps with multi-start projected descent."""

from __future__ import annotations

import csv
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np

from .game_core import BimatrixGame, LambdaPair, StrategyProfile, evaluate, normalize_game
from .simplex_opt import PgdParams, pgd_stationary

DEFAULT_GRID: Tuple[float, ...] = tuple(i / 10 for i in range(-10, 11))


# -- catalog -------------------------------------------------------------------

def ts_tight(b: float = 0.3393) -> BimatrixGame:
    """3x3 game where ``(e1, e1)`` is a descent stationary point of regret ``b``."""
    R = np.array([[0.1, 0.0, 0.0], [0.1 + b, 1.0, 1.0], [0.1 + b, 0.0, 0.0]])
    C = np.array([[0.1, 0.1 + b, 0.1 + b], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    return BimatrixGame(R, C)


def ts_plain(b: float = 0.3393) -> BimatrixGame:
    """The same construction without the 0.1 offsets."""
    R = np.array([[0.0, 0.0, 0.0], [b, 1.0, 1.0], [b, 0.0, 0.0]])
    C = np.array([[0.0, b, b], [0.0, 1.0, 0.0], [0.0, 1.0, 0.0]])
    return BimatrixGame(R, C)


def penalty(k: float = -100.0) -> BimatrixGame:
    """Coordination game with penalty ``k`` for mismatching the two good outcomes."""
    M = np.array([[10.0, 0.0, k], [0.0, 2.0, 0.0], [k, 0.0, 10.0]])
    return BimatrixGame(M, M.copy())


def pd() -> BimatrixGame:
    """Prisoner's dilemma with payoffs to be maximized; action 2 is defect."""
    return BimatrixGame(np.array([[2.0, 0.0], [3.0, 1.0]]), np.array([[2.0, 3.0], [0.0, 1.0]]))


def random_gaussian(
    n: int,
    mu: float = 0.5,
    sigma2: float = 0.2,
    symmetric: bool = True,
    seed: int = 0,
    n_cols: Optional[int] = None,
) -> BimatrixGame:
    """Entries drawn from N(mu, sigma2); ``C = R.T`` when ``symmetric``."""
    m = n if n_cols is None else n_cols
    if n < 1 or m < 1:
        raise ValueError("dimensions must be positive")
    if symmetric and m != n:
        raise ValueError("a symmetric game must be square")
    rng = np.random.default_rng(seed)
    sd = float(np.sqrt(sigma2))
    R = rng.normal(mu, sd, size=(n, m))
    C = R.T.copy() if symmetric else rng.normal(mu, sd, size=(n, m))
    return BimatrixGame(R, C)


_CATALOG = {
    "ts_tight": ts_tight,
    "ts_plain": ts_plain,
    "penalty": penalty,
    "pd": pd,
    "random_gaussian": random_gaussian,
}
CATALOG_NAMES = tuple(_CATALOG)


def catalog(name: str, **params) -> BimatrixGame:
    try:
        make = _CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown catalog game {name!r}; choose from {', '.join(CATALOG_NAMES)}") from None
    return make(**params)


# -- sweeps --------------------------------------------------------------------

def softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - z.max())
    return e / e.sum()


def random_softmax_profile(n_rows: int, n_cols: int, rng: np.random.Generator) -> StrategyProfile:
    """Softmax of standard-normal logits for each player."""
    if n_rows < 1 or n_cols < 1:
        raise ValueError("dimensions must be positive")
    return StrategyProfile(softmax(rng.standard_normal(n_rows)), softmax(rng.standard_normal(n_cols)))


def cell_rng(seed: int, i: int, j: int, run: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, i, j, run]))


@dataclass(frozen=True)
class SweepConfig:
    """Behaviour grid and multi-start settings.

    ``init`` is ``None`` for random softmax starts or a fixed profile; a fixed
    start is deterministic, so each cell then runs once whatever ``runs`` says.
    """

    grid: Tuple[float, ...] = DEFAULT_GRID
    runs: int = 20
    seed: int = 0
    objective: str = "sum_regret"
    init: Optional[StrategyProfile] = None
    normalize: bool = False
    pgd: PgdParams = field(default_factory=PgdParams)

    def __post_init__(self):
        grid = tuple(float(v) for v in self.grid)
        if not grid:
            raise ValueError("grid must not be empty")
        if any(not -1.0 <= v <= 1.0 for v in grid):
            raise ValueError("grid values must lie in [-1, 1]")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.objective not in ("max_regret", "sum_regret"):
            raise ValueError(f"unknown objective {self.objective!r}")
        object.__setattr__(self, "grid", grid)

    @property
    def params(self) -> PgdParams:
        return self.pgd.replace(objective=self.objective)

    @property
    def effective_runs(self) -> int:
        return 1 if self.init is not None else self.runs


@dataclass(frozen=True, eq=False)
class SweepResult:
    grid: Tuple[float, ...]
    eps_mean: np.ndarray
    eps_std: np.ndarray
    eps_min: np.ndarray
    runs: int
    profiles: Dict[Tuple[int, int], Tuple[StrategyProfile, ...]] = field(default_factory=dict, repr=False)

    @property
    def shape(self) -> Tuple[int, int]:
        return self.eps_mean.shape

    def argmax(self) -> Tuple[float, float]:
        i, j = np.unravel_index(int(np.argmax(self.eps_mean)), self.eps_mean.shape)
        return self.grid[i], self.grid[j]

    def same_values(self, other: "SweepResult") -> bool:
        return (
            self.grid == other.grid
            and self.runs == other.runs
            and np.array_equal(self.eps_mean, other.eps_mean)
            and np.array_equal(self.eps_std, other.eps_std)
            and np.array_equal(self.eps_min, other.eps_min)
        )


def _run_cell(G: BimatrixGame, cfg: SweepConfig, i: int, j: int):
    L = LambdaPair(cfg.grid[i], cfg.grid[j])
    params = cfg.params
    eps = []
    profiles = []
    for run in range(cfg.effective_runs):
        if cfg.init is None:
            p0 = random_softmax_profile(G.n_rows, G.n_cols, cell_rng(cfg.seed, i, j, run))
        else:
            p0 = cfg.init
        p = pgd_stationary(G, L, p0, params).profile
        eps.append(evaluate(G, L, p).eps)
        profiles.append(p)
    return i, j, np.array(eps), tuple(profiles)


def _run_row(args):
    G, cfg, i = args
    return [_run_cell(G, cfg, i, j) for j in range(len(cfg.grid))]


def lambda_sweep(G: BimatrixGame, cfg: SweepConfig = SweepConfig(), workers: int = 1) -> SweepResult:
    """Descend from each start in every grid cell and collect eps in the modified game.

    Cells use independent seeded streams, so results do not depend on
    ``workers``. With ``cfg.normalize`` the base game is mapped to [0, 1] first.
    """
    if cfg.init is not None:
        cfg.init.check(G)
    if cfg.normalize:
        G = normalize_game(G)
    k = len(cfg.grid)
    mean = np.zeros((k, k))
    std = np.zeros((k, k))
    low = np.zeros((k, k))
    profiles = {}
    jobs = [(G, cfg, i) for i in range(k)]
    if workers is None or workers <= 0:
        workers = os.cpu_count() or 1
    if workers == 1:
        rows = map(_run_row, jobs)
    else:
        pool = ProcessPoolExecutor(max_workers=workers)
        rows = pool.map(_run_row, jobs)
    try:
        for row in rows:
            for i, j, eps, ps in row:
                mean[i, j] = eps.mean()
                std[i, j] = eps.std()
                low[i, j] = eps.min()
                profiles[(i, j)] = ps
    finally:
        if workers != 1:
            pool.shutdown()
    return SweepResult(cfg.grid, mean, std, low, cfg.effective_runs, profiles)


# -- output --------------------------------------------------------------------

def write_sweep_csv(res: SweepResult, path: Union[str, Path]) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["lambda_r", "lambda_c", "eps_mean", "eps_std", "eps_min", "runs"])
            for i, lr in enumerate(res.grid):
                for j, lc in enumerate(res.grid):
                    w.writerow([
                        f"{lr:.1f}",
                        f"{lc:.1f}",
                        f"{res.eps_mean[i, j]:.12g}",
                        f"{res.eps_std[i, j]:.12g}",
                        f"{res.eps_min[i, j]:.12g}",
                        res.runs,
                    ])
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV {path}: {exc}") from exc


def pgm_pixels(values: np.ndarray) -> np.ndarray:
    """Gray levels for a heatmap: 0 maps to 255 (white), the maximum to 0 (black)."""
    v = np.asarray(values, dtype=float)
    top = float(v.max()) if v.size else 0.0
    if top <= 0.0:
        return np.full(v.shape, 255, dtype=int)
    return np.rint(255.0 * (1.0 - np.clip(v, 0.0, None) / top)).astype(int)


def write_pgm(values: np.ndarray, path: Union[str, Path]) -> None:
    """Plain (P2) graymap; image row ``i`` holds grid row ``i``."""
    pix = pgm_pixels(values)
    rows, cols = pix.shape
    lines = ["P2", f"{cols} {rows}", "255"]
    lines += [" ".join(str(p) for p in r) for r in pix]
    path = Path(path)
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write heatmap {path}: {exc}") from exc


def read_pgm(path: Union[str, Path]) -> np.ndarray:
    tokens = Path(path).read_text().split()
    if tokens[0] != "P2":
        raise ValueError(f"{path}: not a plain PGM file")
    cols, rows, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array([int(t) for t in tokens[4:4 + rows * cols]]).reshape(rows, cols)


def emit_heatmap(res: SweepResult, path: Union[str, Path]) -> Tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.pgm`` next to ``path``; returns both paths."""
    path = Path(path)
    stem = path.with_suffix("") if path.suffix in (".csv", ".pgm") else path
    csv_path = stem.with_name(stem.name + ".csv")
    pgm_path = stem.with_name(stem.name + ".pgm")
    write_sweep_csv(res, csv_path)
    write_pgm(res.eps_mean, pgm_path)
    return csv_path, pgm_path


def config_for(name: str, **overrides) -> SweepConfig:
    """Sweep settings used for a catalog game.

    The tight examples start from ``(e1, e1)`` on the max-regret objective;
    the penalty game is normalized first because its payoffs leave [0, 1].
    """
    base: dict = {}
    if name in ("ts_tight", "ts_plain"):
        base = dict(objective="max_regret", init=StrategyProfile.pure(0, 0, 3, 3))
    elif name == "penalty":
        base = dict(normalize=True)
    base.update(overrides)
    return SweepConfig(**base)


def cell_index(grid: Sequence[float], value: float) -> int:
    for k, v in enumerate(grid):
        if abs(v - value) < 1e-9:
            return k
    raise ValueError(f"{value} is not on the grid")
