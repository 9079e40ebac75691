import numpy as np
import pytest

from altnash import BimatrixGame, LambdaPair, evaluate, modified_game
from altnash.opponent_sim import (
    AgentSpec,
    ConvergenceRule,
    OpponentModel,
    expected_reward,
    infer_lambda,
    infer_lambda_detail,
    knowledge_transfer_best_response,
    opponent_selection_experiment,
    repeated_play,
    select_opponent,
    transfer_experiment,
    transfer_games,
    type_profile,
    type_strategy,
    write_opponent_csv,
    write_transfer_csv,
)
from altnash.sweep_lab import DEFAULT_GRID, pd, random_gaussian

TRANSFER_GAME = BimatrixGame(np.array([[4.0, 0.0], [3.0, 1.0]]), np.array([[2.0, 3.0], [0.0, 1.0]]))


def test_type_strategy_pd():
    G = pd()
    np.testing.assert_allclose(type_strategy(G, 0.0, 0.0), [0, 1], atol=1e-9)
    np.testing.assert_allclose(type_strategy(G, 0.0, 1.0), [1, 0], atol=1e-9)


def test_type_strategy_single_action():
    G = BimatrixGame(np.array([[1.0]]), np.array([[2.0]]))
    np.testing.assert_array_equal(type_strategy(G, 0.3, -0.4), [1.0])


def test_type_profile_low_regret_and_cached():
    G = random_gaussian(6, seed=11)
    p = type_profile(G, 0.0, 0.5)
    assert type_profile(G, 0.0, 0.5) is p
    rep = evaluate(G, LambdaPair(0.0, 0.5), p)
    assert rep.sum < 0.05


def test_agent_spec_validation():
    with pytest.raises(ValueError):
        AgentSpec(0, 1.5)
    with pytest.raises(ValueError):
        AgentSpec(0, 0.0, np.array([0.5, 0.6]))
    fixed = AgentSpec(1, 0.0, np.array([0.25, 0.75]))
    np.testing.assert_array_equal(fixed.strategy_in(pd(), 0.0), [0.25, 0.75])


def test_opponent_model_empirical_and_prior():
    m = OpponentModel.empty(3)
    np.testing.assert_allclose(m.empirical, [1 / 3] * 3)
    m.observe(np.array([0, 0, 2, 2, 2]))
    np.testing.assert_allclose(m.empirical, [0.4, 0.0, 0.6])
    w = OpponentModel.with_prior([0.0, 1.0, 0.0], 5.0)
    np.testing.assert_allclose(w.empirical, [0, 1, 0])
    w.observe(np.array([0] * 5))
    np.testing.assert_allclose(w.empirical, [0.5, 0.5, 0.0])
    with pytest.raises(ValueError):
        OpponentModel.with_prior([1.0], -1.0)


def test_repeated_play_frequencies_converge():
    G = random_gaussian(4, seed=2)
    y = np.array([0.1, 0.2, 0.3, 0.4])
    m = repeated_play(G, 0.0, AgentSpec(0, 0.0, y), 40_000, np.random.default_rng(0))
    assert m.rounds_observed == 40_000
    np.testing.assert_allclose(m.empirical, y, atol=0.01)
    # uniform learner: mean reward is the average of R @ y
    assert m.mean_reward == pytest.approx(float((G.R @ y).mean()), abs=0.01)
    with pytest.raises(ValueError):
        repeated_play(G, 0.0, AgentSpec(0, 0.0, y), 0, np.random.default_rng(0))


def test_inference_picks_l1_nearest_with_ties_to_smallest():
    G = pd()
    # in the dilemma every type below some threshold defects: the tie goes to -1
    inf = infer_lambda_detail(np.array([0.0, 1.0]), G)
    assert inf.distance < 1e-9
    assert inf.lambda_hat == inf.tied[0] == min(inf.tied)
    assert not inf.identifiable
    ys = {lam: type_strategy(G, 0.0, lam) for lam in DEFAULT_GRID}
    brute = min(DEFAULT_GRID, key=lambda lam: (round(np.abs(ys[lam] - [0, 1]).sum(), 12), lam))
    assert inf.lambda_hat == brute


def test_infer_lambda_recovers_exact_strategy():
    G = random_gaussian(8, seed=5)
    ys = {lam: type_strategy(G, 0.0, lam) for lam in DEFAULT_GRID}
    for lam in (-0.7, 0.0, 0.6):
        inf = infer_lambda_detail(ys[lam], G)
        assert inf.distance == 0.0
        assert lam in inf.tied
    with pytest.raises(ValueError):
        infer_lambda(OpponentModel.empty(8), G)


def test_select_opponent_is_argmax_and_breaks_ties_low():
    G = random_gaussian(6, seed=7)
    est = [(3, -0.5), (1, 0.4), (2, 0.4), (0, 1.0)]
    chosen = select_opponent(G, 0.0, est)
    scores = {cid: expected_reward(G, 0.0, lam) for cid, lam in est}
    top = max(scores.values())
    assert scores[chosen] == top
    assert chosen == min(c for c, s in scores.items() if s == top)
    with pytest.raises(ValueError):
        select_opponent(G, 0.0, [])


def test_knowledge_transfer_example():
    warm = knowledge_transfer_best_response(TRANSFER_GAME, 1.0)
    assert warm.row_payoff == 4.0 and warm.col_payoff == 2.0
    assert warm.modified_payoffs == (4.0, 6.0)
    np.testing.assert_array_equal(warm.profile.row, [1, 0])
    base = knowledge_transfer_best_response(TRANSFER_GAME, 0.0)
    assert base.row_payoff == 1.0
    Gp = modified_game(TRANSFER_GAME, LambdaPair(0, 1))
    np.testing.assert_array_equal(Gp.C, [[6, 3], [3, 2]])


def test_transfer_games_shapes_and_seed():
    A, B = transfer_games(3)
    assert A.shape == (3, 3) and B.shape == (10, 10)
    A2, B2 = transfer_games(3)
    assert A == A2 and B == B2
    assert transfer_games(4)[1] != B


def test_transfer_experiment_accounting():
    A, B = transfer_games(0)
    rule = ConvergenceRule(every=10, windows=5, max_rounds=2000)
    res = transfer_experiment(A, B, 0.5, 3, np.random.default_rng(0), rule=rule)
    assert res.warm_total == res.warm_rounds + 3
    assert res.cold_rounds % 10 == 0 and res.cold_rounds >= 50
    assert res.warm_rounds % 10 == 0 and res.warm_rounds >= 40
    for lam in (res.lambda_hat_warm, res.lambda_hat_cold, res.lambda_hat_prior):
        assert lam in DEFAULT_GRID
    with pytest.raises(ValueError):
        transfer_experiment(A, B, 0.5, 0, np.random.default_rng(0))


def test_transfer_experiment_is_seeded():
    A, B = transfer_games(1)
    a = transfer_experiment(A, B, -0.3, 3, np.random.default_rng(9))
    b = transfer_experiment(A, B, -0.3, 3, np.random.default_rng(9))
    assert a == b


def test_selection_experiment_small(tmp_path):
    G, rep = opponent_selection_experiment(seed=1, n_opponents=6, n_actions=5, rounds=3000)
    assert len(rep.records) == 6
    assert rep.selected in {r.opponent_id for r in rep.records}
    assert 0.0 < rep.training_reward < 1.5
    write_opponent_csv(rep.records, tmp_path / "opp.csv")
    lines = (tmp_path / "opp.csv").read_text().splitlines()
    assert lines[0] == "opponent_id,lambda_true,lambda_hat,rounds,l1_distance"
    assert len(lines) == 7


def test_transfer_csv(tmp_path):
    A, B = transfer_games(2)
    res = transfer_experiment(A, B, 0.0, 3, np.random.default_rng(2))
    write_transfer_csv(res, tmp_path / "t.csv")
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert lines[0] == "path,rounds,lambda_hat"
    assert lines[1].startswith(f"warm,{res.warm_total},")
    assert lines[2].startswith(f"cold,{res.cold_rounds},")


def test_point_mass_opponent_is_observed_exactly():
    G = random_gaussian(4, seed=3)
    m = repeated_play(G, 0.0, AgentSpec(0, 0.0, np.array([1.0, 0, 0, 0])), 100, np.random.default_rng(1))
    np.testing.assert_array_equal(m.empirical, [1, 0, 0, 0])
    one = repeated_play(G, 0.0, AgentSpec(0, 0.0, np.full(4, 0.25)), 1, np.random.default_rng(1))
    assert sorted(one.empirical) == [0, 0, 0, 1]


def test_empirical_distance_after_many_rounds():
    G = random_gaussian(15, seed=4)
    y = np.random.default_rng(0).dirichlet(np.ones(15))
    hits = 0
    for s in range(20):
        m = repeated_play(G, 0.0, AgentSpec(0, 0.0, y), 10_000, np.random.default_rng(s))
        hits += np.abs(m.empirical - y).sum() < 0.1
    assert hits >= 19


def test_inference_exact_on_noiseless_distinct_types():
    G = random_gaussian(10, seed=6)
    ys = {lam: type_strategy(G, 0.0, lam) for lam in DEFAULT_GRID}
    for lam in DEFAULT_GRID:
        if min(np.abs(ys[lam] - ys[o]).sum() for o in DEFAULT_GRID if o != lam) > 1e-6:
            assert infer_lambda_detail(ys[lam], G).lambda_hat == lam
    assert infer_lambda_detail(ys[0.3], G, grid=(0.7,)).lambda_hat == 0.7


def test_same_game_transfer_needs_only_the_stability_window():
    A, _ = transfer_games(5, n_a=6)
    ys = {lam: type_strategy(A, 0.0, lam) for lam in DEFAULT_GRID}
    separated = [lam for lam in DEFAULT_GRID if min(np.abs(ys[lam] - ys[o]).sum() for o in DEFAULT_GRID if o != lam) > 0.3]
    assert separated
    rule = ConvergenceRule()
    for lam in separated:
        res = transfer_experiment(A, A, lam, 2000, np.random.default_rng(3))
        assert res.lambda_hat_prior == res.lambda_hat_warm == lam
        # the prior estimate counts once, so only windows - 1 recomputations are played
        assert res.warm_rounds == rule.every * (rule.windows - 1)
