"""Bimatrix games, the altruism/spite transformation and regret evaluation."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np

ATOL = 1e-9


class DimensionError(ValueError):
    """Raised when a profile or matrix does not fit the game."""


class GameFormatError(ValueError):
    """Malformed game text file; carries the offending line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ScaleInfo:
    """Affine map ``v -> (v - offset) / factor`` applied per player."""

    offset_r: float
    factor_r: float
    offset_c: float
    factor_c: float

    def __post_init__(self):
        if not (self.factor_r > 0 and self.factor_c > 0):
            raise ValueError("scale factors must be positive")


@dataclass(frozen=True, eq=False)
class BimatrixGame:
    R: np.ndarray
    C: np.ndarray
    scale_info: Optional[ScaleInfo] = None

    def __post_init__(self):
        R = _frozen(self.R)
        C = _frozen(self.C)
        if R.ndim != 2 or R.shape[0] < 1 or R.shape[1] < 1:
            raise DimensionError(f"payoff matrix must be 2-D and non-empty, got shape {R.shape}")
        if R.shape != C.shape:
            raise DimensionError(f"R has shape {R.shape} but C has shape {C.shape}")
        if not (np.all(np.isfinite(R)) and np.all(np.isfinite(C))):
            raise ValueError("payoff matrices must have finite entries")
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "C", C)

    @property
    def n_rows(self) -> int:
        return self.R.shape[0]

    @property
    def n_cols(self) -> int:
        return self.R.shape[1]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.R.shape

    def __eq__(self, other):
        if not isinstance(other, BimatrixGame):
            return NotImplemented
        return (
            np.array_equal(self.R, other.R)
            and np.array_equal(self.C, other.C)
            and self.scale_info == other.scale_info
        )

    def __hash__(self):
        return hash((self.R.shape, self.R.tobytes(), self.C.tobytes()))

    def __repr__(self):
        return f"BimatrixGame({self.n_rows}x{self.n_cols})"


@dataclass(frozen=True)
class LambdaPair:
    """Behaviour parameters: positive is altruism, negative is spite."""

    lambda_r: float = 0.0
    lambda_c: float = 0.0

    def __post_init__(self):
        for name in ("lambda_r", "lambda_c"):
            v = float(getattr(self, name))
            if not (-1.0 - ATOL <= v <= 1.0 + ATOL):
                raise ValueError(f"{name}={v} outside [-1, 1]")
            object.__setattr__(self, name, v)

    def __iter__(self):
        yield self.lambda_r
        yield self.lambda_c


def as_strategy(probs, n: Optional[int] = None, tol: float = ATOL) -> np.ndarray:
    """Validate ``probs`` as a point of the probability simplex and freeze it."""
    p = _frozen(probs)
    if p.ndim != 1 or p.size == 0:
        raise DimensionError("a strategy is a non-empty vector")
    if n is not None and p.size != n:
        raise DimensionError(f"strategy has {p.size} entries, expected {n}")
    if np.any(p < -tol) or abs(p.sum() - 1.0) > tol:
        raise ValueError(f"not a probability vector: {p}")
    return p


def pure_strategy(i: int, n: int) -> np.ndarray:
    e = np.zeros(n)
    e[i] = 1.0
    return _frozen(e)


def uniform_strategy(n: int) -> np.ndarray:
    return _frozen(np.full(n, 1.0 / n))


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    row: np.ndarray
    col: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "row", as_strategy(self.row))
        object.__setattr__(self, "col", as_strategy(self.col))

    @classmethod
    def pure(cls, i: int, j: int, n_rows: int, n_cols: int) -> "StrategyProfile":
        return cls(pure_strategy(i, n_rows), pure_strategy(j, n_cols))

    @classmethod
    def uniform(cls, n_rows: int, n_cols: int) -> "StrategyProfile":
        return cls(uniform_strategy(n_rows), uniform_strategy(n_cols))

    def check(self, game: BimatrixGame) -> None:
        if self.row.size != game.n_rows or self.col.size != game.n_cols:
            raise DimensionError(
                f"profile of sizes ({self.row.size}, {self.col.size}) "
                f"does not fit a {game.n_rows}x{game.n_cols} game"
            )

    def allclose(self, other: "StrategyProfile", atol: float = ATOL) -> bool:
        return (
            self.row.shape == other.row.shape
            and self.col.shape == other.col.shape
            and np.allclose(self.row, other.row, atol=atol, rtol=0)
            and np.allclose(self.col, other.col, atol=atol, rtol=0)
        )

    def __eq__(self, other):
        if not isinstance(other, StrategyProfile):
            return NotImplemented
        return np.array_equal(self.row, other.row) and np.array_equal(self.col, other.col)

    def __repr__(self):
        return f"StrategyProfile(row={self.row.tolist()}, col={self.col.tolist()})"


@dataclass(frozen=True)
class RegretReport:
    f_r: float
    f_c: float

    @property
    def eps(self) -> float:
        return max(self.f_r, self.f_c)

    @property
    def sum(self) -> float:
        return self.f_r + self.f_c

    def is_eps_nash(self, eps: float) -> bool:
        return self.eps <= eps


def _normalize_matrix(M: np.ndarray) -> Tuple[np.ndarray, float, float]:
    lo, hi = float(M.min()), float(M.max())
    if hi - lo <= 0.0:
        return np.full_like(M, 0.5), lo - 0.5, 1.0
    return (M - lo) / (hi - lo), lo, hi - lo


def normalize_game(G: BimatrixGame) -> BimatrixGame:
    """Map each player's payoffs affinely onto [0, 1].

    A constant matrix becomes all 0.5. Positive affine maps applied per player
    keep the set of Nash equilibria and scale approximation guarantees.
    """
    R, off_r, fac_r = _normalize_matrix(G.R)
    C, off_c, fac_c = _normalize_matrix(G.C)
    return BimatrixGame(R, C, ScaleInfo(off_r, fac_r, off_c, fac_c))


def modified_game(G: BimatrixGame, L: LambdaPair, renormalize: bool = False) -> BimatrixGame:
    """Return ``(R + lambda_r * C, C + lambda_c * R)``."""
    lr, lc = L
    Gp = BimatrixGame(G.R + lr * G.C, G.C + lc * G.R)
    return normalize_game(Gp) if renormalize else Gp


def _as_profile(p) -> StrategyProfile:
    if isinstance(p, StrategyProfile):
        return p
    x, y = p
    return StrategyProfile(x, y)


def regret_row(G: BimatrixGame, p: StrategyProfile) -> float:
    p = _as_profile(p)
    p.check(G)
    Ry = G.R @ p.col
    return max(float(Ry.max() - p.row @ Ry), 0.0)


def regret_col(G: BimatrixGame, p: StrategyProfile) -> float:
    p = _as_profile(p)
    p.check(G)
    xC = p.row @ G.C
    return max(float(xC.max() - xC @ p.col), 0.0)


def regrets(G: BimatrixGame, p: StrategyProfile) -> RegretReport:
    return RegretReport(regret_row(G, p), regret_col(G, p))


def evaluate(G: BimatrixGame, L: LambdaPair, p: StrategyProfile) -> RegretReport:
    """Regrets of ``p`` in the modified game of ``G`` under ``L``."""
    return regrets(modified_game(G, L), p)


def pure_social_optimum(G: BimatrixGame) -> Tuple[int, int]:
    """Zero-based cell maximizing ``R + C``; ties go to the smallest row, then column."""
    w = G.R + G.C
    # argmax of the flattened array returns the first maximum in row-major order
    i, j = np.unravel_index(int(np.argmax(w)), w.shape)
    return int(i), int(j)


def verify_reduction_identity(A: BimatrixGame, L: LambdaPair) -> float:
    """Max deviation of ``modified_game(A - lr*B, B - lc*A)`` from ``(1 - lr*lc) * (A, B)``."""
    lr, lc = L
    scale = 1.0 - lr * lc
    if abs(scale) < 1e-15:
        raise ValueError("lambda_r * lambda_c = 1 collapses the game to zero")
    base = BimatrixGame(A.R - lr * A.C, A.C - lc * A.R)
    Gp = modified_game(base, L)
    return float(max(np.abs(Gp.R - scale * A.R).max(), np.abs(Gp.C - scale * A.C).max()))


# -- text format ---------------------------------------------------------------

def format_game(G: BimatrixGame, digits: int = 17) -> str:
    fmt = f"{{:.{digits}g}}"
    lines = [f"{G.n_rows} {G.n_cols}"]
    for M in (G.R, G.C):
        for row in M:
            lines.append(" ".join(fmt.format(v) for v in row))
    return "\n".join(lines) + "\n"


def parse_game(text: str) -> BimatrixGame:
    """Parse the whitespace-separated game format.

    Layout: ``n_rows n_cols``, then ``n_rows`` lines of R, then ``n_rows``
    lines of C. Lines starting with ``#`` and blank lines are skipped.
    """
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        try:
            vals = [float(tok) for tok in s.split()]
        except ValueError as exc:
            raise GameFormatError(f"non-numeric entry ({exc})", lineno) from None
        rows.append((lineno, vals))
    if not rows:
        raise GameFormatError("empty game file")
    lineno, header = rows[0]
    if len(header) != 2 or any(v != int(v) or v < 1 for v in header):
        raise GameFormatError("header must be two positive integers 'n_rows n_cols'", lineno)
    m, n = int(header[0]), int(header[1])
    body = rows[1:]
    if len(body) != 2 * m:
        last = body[-1][0] if body else lineno
        raise GameFormatError(f"expected {2 * m} matrix rows, found {len(body)}", last)
    for ln, vals in body:
        if len(vals) != n:
            raise GameFormatError(f"expected {n} entries, found {len(vals)}", ln)
        if not all(np.isfinite(vals)):
            raise GameFormatError("non-finite entry", ln)
    R = [vals for _, vals in body[:m]]
    C = [vals for _, vals in body[m:]]
    return BimatrixGame(np.array(R), np.array(C))


def load_game(path: Union[str, Path]) -> BimatrixGame:
    return parse_game(Path(path).read_text())


def save_game(G: BimatrixGame, path: Union[str, Path]) -> None:
    Path(path).write_text(format_game(G))
