"""Dense tableau simplex and minimax solutions of zero-sum games."""

from __future__ import annotations

from typing import Tuple

import numpy as np

from ..game_core import StrategyProfile

PIVOT_TOL = 1e-12
RESIDUAL_TOL = 1e-7


class NumericalError(RuntimeError):
    def __init__(self, message: str, residual: float = float("nan")):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3g})")


def simplex_max(A: np.ndarray, b: np.ndarray, c: np.ndarray, max_pivots: int | None = None):
    """Solve ``max c.x  s.t.  A x <= b, x >= 0`` for ``b >= 0``.

    The slack basis is feasible, so no phase one is needed. Entering and
    leaving variables follow Bland's rule, which rules out cycling.

    Returns ``(x, duals, value)``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if np.any(b < 0):
        raise ValueError("simplex_max requires b >= 0")
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = list(range(n, n + m))
    if max_pivots is None:
        max_pivots = 50 * (n + m) + 100
    for _ in range(max_pivots):
        entering = np.nonzero(T[m, :-1] < -PIVOT_TOL)[0]
        if entering.size == 0:
            break
        j = int(entering[0])
        col = T[:m, j]
        rows = np.nonzero(col > PIVOT_TOL)[0]
        if rows.size == 0:
            raise NumericalError("LP is unbounded")
        ratios = T[rows, -1] / col[rows]
        rmin = ratios.min()
        tied = rows[ratios <= rmin + PIVOT_TOL * max(1.0, abs(rmin))]
        i = int(min(tied, key=lambda r: basis[r]))
        T[i] /= T[i, j]
        for r in range(m + 1):
            if r != i and T[r, j] != 0.0:
                T[r] -= T[r, j] * T[i]
        basis[i] = j
    else:
        raise NumericalError("simplex pivot limit reached")
    x = np.zeros(n + m)
    for r, var in enumerate(basis):
        x[var] = T[r, -1]
    return x[:n], T[m, n:n + m].copy(), float(T[m, -1])


def zero_sum_ne(A) -> Tuple[StrategyProfile, float]:
    """Minimax profile and value of the zero-sum game where the row player receives ``A``.

    The payoffs are shifted and scaled into (0, 1], the column player's
    LP ``max 1.w  s.t.  M w <= 1`` is solved, and the row strategy is read off
    the slack duals.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.size == 0 or not np.all(np.isfinite(A)):
        raise ValueError("zero_sum_ne needs a finite non-empty matrix")
    lo = float(A.min())
    M = A - lo + 1.0
    s = float(M.max())
    M /= s
    m, n = M.shape
    w, u, total = simplex_max(M, np.ones(m), np.ones(n))
    if total <= 0:
        raise NumericalError("degenerate LP value", total)
    y = np.maximum(w, 0.0)
    x = np.maximum(u, 0.0)
    y /= y.sum()
    x /= x.sum()
    v = float(x @ A @ y)
    resid = max(float((A @ y).max()) - v, v - float((x @ A).min()))
    if resid > RESIDUAL_TOL:
        raise NumericalError("zero-sum solution fails the best-response check", resid)
    return StrategyProfile(x, y), v
