"""Acceptance criteria 1-11, each checked at its stated tolerance and time budget.

Every test records one PASS/FAIL line, printed in the pytest terminal summary
(or directly when this file is run as a script).
"""

import time

import numpy as np
import pytest

from altnash import (
    BimatrixGame,
    LambdaPair,
    PgdParams,
    StrategyProfile,
    evaluate,
    modified_game,
    optimal_lambdas,
    pgd_stationary,
    project_simplex,
    verify_reduction_identity,
    zero_sum_ne,
)
from altnash import equilibrium, opponent_sim, sweep_lab
from altnash.simplex_opt import objective_and_gradient, objective_value
from conftest import CRITERIA_LINES, random_game

B_TS = 0.3393
GRID = sweep_lab.DEFAULT_GRID


def record(number, name, ok, detail, seconds, budget=None):
    in_time = budget is None or seconds < budget
    status = "PASS" if ok and in_time else "FAIL"
    limit = f" (limit {budget:g} s)" if budget is not None else ""
    CRITERIA_LINES.append(f"criterion {number:2d} [{status}] {name}: {detail}; {seconds:.2f} s{limit}")
    print(CRITERIA_LINES[-1])
    assert ok, detail
    assert in_time, f"took {seconds:.2f} s, budget {budget} s"


def theorem_suite(n_games=200, seed=2024):
    rng = np.random.default_rng(seed)
    for _ in range(n_games):
        n = int(rng.integers(2, 21))
        yield random_game(rng, n)


# -- 1 ------------------------------------------------------------------------

def test_c01_tight_example_regret():
    t0 = time.perf_counter()
    G = sweep_lab.ts_tight(B_TS)
    L = LambdaPair(0.0, 0.0)
    p0 = StrategyProfile.pure(0, 0, 3, 3)
    eps = evaluate(G, L, p0).eps
    res = pgd_stationary(G, L, p0, PgdParams(objective="max_regret"))
    moved = abs(res.value - res.start_value)
    dt = time.perf_counter() - t0
    ok = abs(eps - B_TS) <= 1e-12 and moved < 1e-9
    record(1, "tight example regret", ok, f"eps={eps:.15g}, objective change={moved:.2e}", dt, 1.0)


# -- 2, 3 ---------------------------------------------------------------------

def test_c02_altruism_social_optimum_bound():
    t0 = time.perf_counter()
    violations = 0
    worst = -np.inf
    checks = 0
    for G in theorem_suite():
        for k in range(1, 11):
            lam = k / 10
            _, rep = equilibrium.altruism_social_opt_ne(G, lam)
            worst = max(worst, rep.eps - (1.0 - lam))
            violations += rep.eps > 1.0 - lam + 1e-9
            checks += 1
    dt = time.perf_counter() - t0
    record(2, "altruism bound 1-lambda", violations == 0,
           f"{violations} violations in {checks} checks, max eps-bound={worst:.3g}", dt, 30.0)


def test_c03_spite_zero_sum_bound():
    t0 = time.perf_counter()
    violations = 0
    worst = -np.inf
    worst_full = 0.0
    checks = 0
    for G in theorem_suite():
        p, _ = zero_sum_ne(G.R - G.C)
        for k in range(1, 11):
            lam = -k / 10
            eps = evaluate(G, LambdaPair(lam, lam), p).eps
            # the wrapper must agree with the direct evaluation
            if k in (1, 10):
                assert equilibrium.spite_zero_sum_ne(G, lam)[1].eps == pytest.approx(eps, abs=1e-12)
            worst = max(worst, eps - (1.0 + lam))
            violations += eps > 1.0 + lam + 1e-7
            checks += 1
            if k == 10:
                worst_full = max(worst_full, eps)
                violations += eps > 1e-7
    dt = time.perf_counter() - t0
    record(3, "spite bound 1+lambda", violations == 0,
           f"{violations} violations in {checks} checks, max eps-bound={worst:.3g}, max eps at -1={worst_full:.2e}",
           dt, 60.0)


# -- 4 ------------------------------------------------------------------------

def test_c04_reduction_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst = 0.0
    for _ in range(50):
        m, n = (int(v) for v in rng.integers(2, 11, size=2))
        A = BimatrixGame(rng.random((m, n)), rng.random((m, n)))
        for lr in GRID:
            for lc in GRID:
                if abs(lr * lc - 1.0) < 1e-12:
                    continue
                worst = max(worst, verify_reduction_identity(A, LambdaPair(lr, lc)))
    dt = time.perf_counter() - t0
    record(4, "reduction identity", worst <= 1e-12, f"max deviation {worst:.2e}", dt, 5.0)


# -- 5 ------------------------------------------------------------------------

def test_c05_alternating_monotone():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    bad = 0
    for k in range(100):
        G = random_game(rng, 5)
        p0 = sweep_lab.random_softmax_profile(5, 5, rng)
        traj = equilibrium.alternating_optimization(G, p0, h=100)
        bad += not traj.is_monotone(1e-9)
    G = sweep_lab.ts_tight(B_TS)
    traj = equilibrium.alternating_optimization(G, StrategyProfile.pure(0, 0, 3, 3), h=100)
    final = traj.final.regret
    dt = time.perf_counter() - t0
    ok = bad == 0 and final < B_TS
    record(5, "alternating optimization", ok,
           f"{bad}/100 non-monotone trajectories, tight example final regret {final:.6g}", dt, 120.0)


# -- 6 ------------------------------------------------------------------------

def test_c06_pd_sweep():
    t0 = time.perf_counter()
    cfg = sweep_lab.config_for("pd", runs=20, seed=7)
    res = sweep_lab.lambda_sweep(sweep_lab.pd(), cfg)
    worst = float(res.eps_mean.max())
    dt = time.perf_counter() - t0
    ok = res.eps_mean.size == 441 and worst <= 1e-3
    record(6, "prisoner's dilemma sweep", ok, f"441 cells, max eps_mean={worst:.3g}", dt, 120.0)


# -- 7 ------------------------------------------------------------------------

def test_c07a_tight_sweep_fraction():
    t0 = time.perf_counter()
    res = sweep_lab.lambda_sweep(sweep_lab.ts_tight(B_TS), sweep_lab.config_for("ts_tight"))
    frac = float((res.eps_mean < B_TS).mean())
    dt = time.perf_counter() - t0
    record(7, "tight sweep improves on 0.3393", frac >= 0.6, f"fraction of cells below 0.3393 = {frac:.3f}", dt)


def test_c07b_penalty_sweep_band():
    t0 = time.perf_counter()
    res = sweep_lab.lambda_sweep(sweep_lab.penalty(), sweep_lab.config_for("penalty", runs=20, seed=0))
    band = np.array([-0.9 - 1e-9 <= v <= -0.7 + 1e-9 for v in GRID])
    mask = band[:, None] | band[None, :]
    top = float(res.eps_mean.max())
    band_top = float(res.eps_mean[mask].max())
    lr, lc = res.argmax()
    dt = time.perf_counter() - t0
    ok = band_top >= top
    record(7, "penalty sweep maximum near lambda=-0.8", ok,
           f"grid max {top:.3g} at ({lr:.1f},{lc:.1f}), max within band {band_top:.3g}, "
           f"median {float(np.median(res.eps_mean)):.3g} (band max above median: {band_top > np.median(res.eps_mean)})", dt)


# -- 8 ------------------------------------------------------------------------

def test_c08_knowledge_transfer_example():
    t0 = time.perf_counter()
    G = BimatrixGame(np.array([[4.0, 0.0], [3.0, 1.0]]), np.array([[2.0, 3.0], [0.0, 1.0]]))
    warm = opponent_sim.knowledge_transfer_best_response(G, 1.0)
    base = opponent_sim.knowledge_transfer_best_response(G, 0.0)
    dt = time.perf_counter() - t0
    ok = warm.row_payoff == 4.0 and base.row_payoff == 1.0 and warm.modified_payoffs == (4.0, 6.0)
    record(8, "knowledge transfer example", ok,
           f"row payoff {warm.row_payoff:g} with lambda_c=1 vs {base.row_payoff:g} with lambda_c=0, "
           f"modified payoffs {warm.modified_payoffs}", dt)


# -- 9 ------------------------------------------------------------------------

def test_c09_lambda_inference_and_selection():
    t0 = time.perf_counter()
    lams = [GRID[k] for k in np.random.default_rng(5).integers(0, len(GRID), 20)]
    G, rep = opponent_sim.opponent_selection_experiment(seed=3, n_opponents=20, n_actions=15, rounds=10_000, lambdas=lams)
    ys = {lam: opponent_sim.type_strategy(G, 0.0, lam) for lam in GRID}
    separated = wrong = 0
    for r in rep.records:
        gap = min(np.abs(ys[lam] - ys[r.lambda_true]).sum() for lam in GRID if lam != r.lambda_true)
        if gap > 0.1:
            separated += 1
            wrong += r.lambda_hat != r.lambda_true
    scores = {r.opponent_id: opponent_sim.expected_reward(G, 0.0, r.lambda_hat) for r in rep.records}
    best = max(scores.values())
    argmax_ok = scores[rep.selected] >= best - 1e-12 and rep.selected == min(k for k, s in scores.items() if s >= best - 1e-12)
    dt = time.perf_counter() - t0
    ok = separated > 0 and wrong == 0 and argmax_ok
    record(9, "lambda inference and selection", ok,
           f"{separated - wrong}/{separated} separated opponents recovered, selected {rep.selected} is argmax: {argmax_ok}",
           dt, 180.0)


# -- 10 -----------------------------------------------------------------------

def identifiable_types(B, margin=1e-6):
    ys = {lam: opponent_sim.type_strategy(B, 0.0, lam) for lam in GRID}
    return [lam for lam in GRID if min(np.abs(ys[lam] - ys[o]).sum() for o in GRID if o != lam) > margin]


def test_c10_transfer_learning():
    t0 = time.perf_counter()
    warm, cold = [], []
    warm_hit = cold_hit = 0
    n = 0
    for seed in range(20):
        A, B = opponent_sim.transfer_games(seed)
        types = identifiable_types(B)
        if not types:
            continue
        lam = types[int(np.random.default_rng([seed, 2]).integers(len(types)))]
        res = opponent_sim.transfer_experiment(A, B, lam, 3, np.random.default_rng([seed, 1]))
        n += 1
        warm.append(res.warm_total)
        cold.append(res.cold_rounds)
        warm_hit += res.lambda_hat_warm == lam
        cold_hit += res.lambda_hat_cold == lam
    dt = time.perf_counter() - t0
    faster = np.median(warm) < np.median(cold)
    ok = n == 20 and faster and warm_hit == n and cold_hit == n
    record(10, "transfer learning", ok,
           f"median rounds warm {np.median(warm):g} vs cold {np.median(cold):g} (ordering holds: {faster}); "
           f"true lambda recovered warm {warm_hit}/{n}, cold {cold_hit}/{n}", dt)


# -- 11 -----------------------------------------------------------------------

def simplex_grid(step=0.01):
    k = int(round(1 / step))
    pts = [(i, j, k - i - j) for i in range(k + 1) for j in range(k + 1 - i)]
    return np.array(pts, dtype=float) / k


def lambda_grid_objective(G, p, objective, step=1e-3):
    lam = np.linspace(-1.0, 1.0, int(round(2 / step)) + 1)
    x, y = p.row, p.col
    Ry, Cy, xR, xC = G.R @ y, G.C @ y, x @ G.R, x @ G.C
    # regret at every grid value, straight from the definition in the modified game
    fr = (Ry[None, :] + lam[:, None] * Cy[None, :]).max(axis=1) - (x @ Ry + lam * (x @ Cy))
    fc = (xC[None, :] + lam[:, None] * xR[None, :]).max(axis=1) - (xC @ y + lam * (xR @ y))
    fr, fc = fr.min(), fc.min()
    return max(fr, fc) if objective == "max_regret" else fr + fc


def zero_sum_residual(A, p, v):
    return max(float((A @ p.col).max()) - v, v - float((p.row @ A).min()))


def fd_points(rng, count):
    """Random interior profiles in random games, kept only away from kinks."""
    out = []
    while len(out) < count:
        m, n = (int(v) for v in rng.integers(2, 7, size=2))
        G = random_game(rng, m, n)
        x, y = rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(n))
        Ry, xC = G.R @ y, x @ G.C
        gaps = [np.diff(np.sort(Ry))[-1] if m > 1 else 1.0, np.diff(np.sort(xC))[-1] if n > 1 else 1.0]
        fr, fc = Ry.max() - x @ Ry, xC.max() - xC @ y
        if min(gaps) > 1e-3 and abs(fr - fc) > 1e-3:
            out.append((G, x, y))
    return out


def test_c11_oracle_suites():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    notes = []

    # projection against a 0.01 lattice of the 2-simplex
    pts = simplex_grid()
    proj_gap = 0.0
    proj_worse = 0.0
    for _ in range(200):
        v = rng.normal(0.3, 1.0, 3)
        p = project_simplex(v)
        d = ((pts - v) ** 2).sum(axis=1)
        q = pts[int(np.argmin(d))]
        proj_gap = max(proj_gap, float(np.abs(p - q).max()))
        proj_worse = max(proj_worse, float(((p - v) ** 2).sum() - d.min()))
    proj_ok = proj_gap <= 1e-2 + 1e-9 and proj_worse <= 1e-12
    notes.append(f"projection gap {proj_gap:.3g}")

    # behaviour LP against a 1e-3 brute-force grid
    lp_excess = -np.inf
    for k in range(50):
        m, n = (int(v) for v in rng.integers(2, 9, size=2))
        G = random_game(rng, m, n)
        p = StrategyProfile(rng.dirichlet(np.ones(m)), rng.dirichlet(np.ones(n)))
        for obj in ("max_regret", "sum_regret"):
            res = optimal_lambdas(G, p, obj)
            val = objective_value(modified_game(G, res.lambdas), p, obj)
            lp_excess = max(lp_excess, val - lambda_grid_objective(G, p, obj))
    lp_ok = lp_excess <= 1e-12
    notes.append(f"lambda LP minus grid <= {lp_excess:.2g}")

    # zero-sum solver residuals
    mats = [np.array([[1.0, -1.0], [-1.0, 1.0]]), np.array([[0.0, -1.0, 1.0], [1.0, 0.0, -1.0], [-1.0, 1.0, 0.0]])]
    mats += [rng.normal(size=tuple(int(v) for v in rng.integers(2, 12, size=2))) for _ in range(20)]
    zs_res = 0.0
    for A in mats:
        p, v = zero_sum_ne(A)
        zs_res = max(zs_res, zero_sum_residual(A, p, v))
    zs_ok = zs_res <= 1e-7
    notes.append(f"zero-sum residual {zs_res:.2g}")

    # analytic subgradients against central differences along feasible directions
    fd_err = 0.0
    h = 1e-6
    for i, (G, x, y) in enumerate(fd_points(rng, 100)):
        obj = ("max_regret", "sum_regret")[i % 2]
        _, gx, gy = objective_and_gradient(G, x, y, obj)
        dx, dy = rng.normal(size=x.size), rng.normal(size=y.size)
        dx -= dx.mean()
        dy -= dy.mean()
        fp = objective_and_gradient(G, x + h * dx, y + h * dy, obj)[0]
        fm = objective_and_gradient(G, x - h * dx, y - h * dy, obj)[0]
        num = (fp - fm) / (2 * h)
        ana = float(gx @ dx + gy @ dy)
        fd_err = max(fd_err, abs(num - ana) / max(abs(ana), 1e-8))
    fd_ok = fd_err <= 1e-4
    notes.append(f"finite-difference rel. err {fd_err:.2g}")

    dt = time.perf_counter() - t0
    record(11, "oracle suites", proj_ok and lp_ok and zs_ok and fd_ok, ", ".join(notes), dt)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q"]))
