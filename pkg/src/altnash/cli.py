"""Command-line front end: ``altnash <subcommand> [options]``.

Exit status is 0 on success, 1 on bad input and 2 on numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import equilibrium, opponent_sim, sweep_lab
from .game_core import (
    BimatrixGame,
    GameFormatError,
    LambdaPair,
    StrategyProfile,
    evaluate,
    load_game,
    modified_game,
    normalize_game,
    verify_reduction_identity,
)
from .simplex_opt import NumericalError, PgdParams, pgd_stationary

OUT_ENV = "ALTNASH_OUT"
log = logging.getLogger("altnash")


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _lambda(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not -1.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{v} is outside [-1, 1]")
    return v


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"{v} must be >= 1")
    return v


def _seed(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return v


def _global_options(p: argparse.ArgumentParser, defaults) -> None:
    d = (lambda k: defaults[k]) if defaults else (lambda k: argparse.SUPPRESS)
    p.add_argument("--seed", type=_seed, default=d("seed"))
    p.add_argument("--out", type=Path, default=d("out"), help=f"output directory (default: ${OUT_ENV} or .)")
    p.add_argument("--workers", type=_positive, default=d("workers"))
    p.add_argument("-v", "--verbose", action="count", default=d("verbose"))


def _game_options(p: argparse.ArgumentParser) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--game", type=Path, help="game file")
    src.add_argument("--catalog", choices=sweep_lab.CATALOG_NAMES, help="built-in game")
    p.add_argument("--b", type=float, default=0.3393, help="parameter of the tight examples")
    p.add_argument("--k", type=float, default=-100.0, help="penalty of the penalty game")
    p.add_argument("--n", type=_positive, default=10, help="size of random_gaussian")
    p.add_argument("--game-seed", type=_seed, default=None, help="seed of random_gaussian (default: --seed)")


def _pgd_options(p: argparse.ArgumentParser, objective: str) -> None:
    p.add_argument("--objective", choices=("max_regret", "sum_regret"), default=objective)
    p.add_argument("--max-iters", type=_positive, default=PgdParams.max_iters)
    p.add_argument("--step", choices=("diminishing", "constant"), default=PgdParams.step_rule)
    p.add_argument("--eta", type=float, default=PgdParams.eta)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="altnash", description=__doc__.splitlines()[0])
    _global_options(parser, dict(seed=0, out=None, workers=1, verbose=0))
    # the same flags are accepted after the subcommand and override the global ones
    common = _Parser(add_help=False)
    _global_options(common, None)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name: str, **kw) -> argparse.ArgumentParser:
        return sub.add_parser(name, parents=[common], **kw)

    p = add("solve", help="descend from one start at fixed behaviour")
    _game_options(p)
    _pgd_options(p, "max_regret")
    p.add_argument("--lr", type=_lambda, default=0.0)
    p.add_argument("--lc", type=_lambda, default=0.0)
    p.add_argument("--init", default="random", help="random, uniform, eI,J or e1e1 (1-based)")

    p = add("sweep", help="behaviour-grid sweep with heatmap output")
    _game_options(p)
    p.add_argument("--runs", type=_positive, default=20)
    p.add_argument("--objective", choices=("max_regret", "sum_regret"), default=None)
    p.add_argument("--init", default=None, help="random (default for most games), uniform, eI,J or e1e1")
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=None)

    p = add("alternate", help="alternating profile / behaviour optimization")
    _game_options(p)
    _pgd_options(p, "max_regret")
    p.add_argument("--h", type=_positive, default=100)
    p.add_argument("--init", default="random")
    p.add_argument("--lr", type=_lambda, default=0.0)
    p.add_argument("--lc", type=_lambda, default=0.0)
    p.add_argument("--fixed-h", action="store_true", help="run all h iterations")

    for name, helptext in (("theorem2", "social optimum under shared altruism"), ("theorem3", "zero-sum solution under shared spite")):
        p = add(name, help=helptext)
        _game_options(p)
        p.add_argument("--lam", type=_lambda, required=True)

    p = add("opponents", help="type inference and opponent selection")
    p.add_argument("--opponents", type=_positive, default=100)
    p.add_argument("--actions", type=_positive, default=15)
    p.add_argument("--rounds", type=_positive, default=10_000)

    p = add("transfer", help="type inference with and without a transferred prior")
    p.add_argument("--x-rounds", type=_positive, default=3)
    p.add_argument("--lambda-true", type=_lambda, default=None, help="default: drawn from the grid")
    p.add_argument("--small", type=_positive, default=3)
    p.add_argument("--large", type=_positive, default=10)

    p = add("verify", help="check the reduction identity and the zero-sum/common-payoff split")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--game", type=Path)
    src.add_argument("--catalog", choices=sweep_lab.CATALOG_NAMES)
    p.add_argument("--b", type=float, default=0.3393)
    p.add_argument("--k", type=float, default=-100.0)
    p.add_argument("--n", type=_positive, default=10)
    p.add_argument("--game-seed", type=_seed, default=None)
    p.add_argument("--games", type=_positive, default=20, help="random games when no game is given")
    return parser


def _load(args) -> BimatrixGame:
    if getattr(args, "game", None) is not None:
        try:
            return load_game(args.game)
        except OSError as exc:
            raise InputError(f"cannot read {args.game}: {exc.strerror or exc}") from None
        except GameFormatError as exc:
            raise InputError(f"{args.game}: {exc}") from None
    name = args.catalog
    if name in ("ts_tight", "ts_plain"):
        return sweep_lab.catalog(name, b=args.b)
    if name == "penalty":
        return sweep_lab.catalog(name, k=args.k)
    if name == "random_gaussian":
        seed = args.seed if args.game_seed is None else args.game_seed
        return sweep_lab.catalog(name, n=args.n, seed=seed)
    return sweep_lab.catalog(name)


def parse_init(text: str, G: BimatrixGame, rng: np.random.Generator) -> StrategyProfile:
    """``random``, ``uniform``, ``eI,J`` (also ``eI,eJ`` or ``eIeJ``) with 1-based indices."""
    s = text.strip().lower()
    if s == "random":
        return sweep_lab.random_softmax_profile(G.n_rows, G.n_cols, rng)
    if s == "uniform":
        return StrategyProfile.uniform(G.n_rows, G.n_cols)
    if s.startswith("e"):
        body = s[1:]
        parts = body.split(",") if "," in body else body.split("e")
        try:
            i, j = (int(v.strip().removeprefix("e")) for v in parts)
        except ValueError:
            raise InputError(f"bad --init {text!r}: expected eI,J") from None
        if not (1 <= i <= G.n_rows and 1 <= j <= G.n_cols):
            raise InputError(f"--init {text!r} out of range for a {G.n_rows}x{G.n_cols} game")
        return StrategyProfile.pure(i - 1, j - 1, G.n_rows, G.n_cols)
    raise InputError(f"bad --init {text!r}: use random, uniform or eI,J")


def _params(args) -> PgdParams:
    try:
        return PgdParams(max_iters=args.max_iters, step_rule=args.step, eta=args.eta, objective=args.objective)
    except ValueError as exc:
        raise InputError(str(exc)) from None


def _tag(args) -> str:
    if getattr(args, "catalog", None):
        return args.catalog
    if getattr(args, "game", None) is not None:
        return args.game.stem
    return "random"


def _fmt(v: float) -> str:
    return f"{v:.12g}"


def cmd_solve(args, out: Path) -> str:
    G = _load(args)
    L = LambdaPair(args.lr, args.lc)
    p0 = parse_init(args.init, G, np.random.default_rng(args.seed))
    res = pgd_stationary(G, L, p0, _params(args))
    rep = evaluate(G, L, res.profile)
    payload = {
        "lambda_r": L.lambda_r,
        "lambda_c": L.lambda_c,
        "row": res.profile.row.tolist(),
        "col": res.profile.col.tolist(),
        "f_r": rep.f_r,
        "f_c": rep.f_c,
        "eps": rep.eps,
        "iterations": res.iterations,
        "converged": res.converged,
    }
    (out / f"solve_{_tag(args)}.json").write_text(json.dumps(payload, indent=2) + "\n")
    return f"eps={_fmt(rep.eps)} f_r={_fmt(rep.f_r)} f_c={_fmt(rep.f_c)} lambda_r={L.lambda_r:g} lambda_c={L.lambda_c:g}"


def cmd_sweep(args, out: Path) -> str:
    G = _load(args)
    overrides = dict(runs=args.runs, seed=args.seed)
    if args.objective is not None:
        overrides["objective"] = args.objective
    if args.normalize is not None:
        overrides["normalize"] = args.normalize
    if args.init is not None:
        overrides["init"] = None if args.init == "random" else parse_init(args.init, G, np.random.default_rng(args.seed))
    cfg = sweep_lab.config_for(args.catalog or "", **overrides)
    res = sweep_lab.lambda_sweep(G, cfg, workers=args.workers)
    csv_path, pgm_path = sweep_lab.emit_heatmap(res, out / f"sweep_{_tag(args)}")
    lr, lc = res.argmax()
    log.info("wrote %s and %s", csv_path, pgm_path)
    return (
        f"cells={res.eps_mean.size} eps_mean_max={_fmt(res.eps_mean.max())} at lambda=({lr:.1f},{lc:.1f}) "
        f"eps_mean_median={_fmt(float(np.median(res.eps_mean)))}"
    )


def cmd_alternate(args, out: Path) -> str:
    G = _load(args)
    p0 = parse_init(args.init, G, np.random.default_rng(args.seed))
    traj = equilibrium.alternating_optimization(
        G, p0, LambdaPair(args.lr, args.lc), args.h, _params(args), early_stop=not args.fixed_h
    )
    traj.to_csv(out / f"alternate_{_tag(args)}.csv")
    f = traj.final
    return (
        f"regret={_fmt(f.regret)} start={_fmt(traj.steps[0].regret)} iterations={f.t} "
        f"lambda_r={_fmt(f.lambdas.lambda_r)} lambda_c={_fmt(f.lambdas.lambda_c)} converged={traj.converged}"
    )


def _theorem(args, out: Path, which: int) -> str:
    G = normalize_game(_load(args))
    try:
        if which == 2:
            p, rep = equilibrium.altruism_social_opt_ne(G, args.lam)
            bound = 1.0 - args.lam
        else:
            p, rep = equilibrium.spite_zero_sum_ne(G, args.lam)
            bound = 1.0 + args.lam
    except ValueError as exc:
        if isinstance(exc, NumericalError):
            raise
        raise InputError(str(exc)) from None
    payload = {"lambda": args.lam, "row": p.row.tolist(), "col": p.col.tolist(), "eps": rep.eps, "bound": bound}
    (out / f"theorem{which}_{_tag(args)}.json").write_text(json.dumps(payload, indent=2) + "\n")
    return f"eps={_fmt(rep.eps)} bound={_fmt(bound)} holds={rep.eps <= bound + 1e-7}"


def cmd_opponents(args, out: Path) -> str:
    G, rep = opponent_sim.opponent_selection_experiment(
        seed=args.seed, n_opponents=args.opponents, n_actions=args.actions, rounds=args.rounds
    )
    opponent_sim.write_opponent_csv(rep.records, out / "opponents.csv")
    hits = sum(r.lambda_hat == round(r.lambda_true, 1) for r in rep.records)
    sel = rep.records[rep.selected]
    return (
        f"selected={rep.selected} lambda_hat={sel.lambda_hat:.1f} training_reward={_fmt(rep.training_reward)} "
        f"eval_selected={_fmt(rep.eval_selected)} eval_spiteful={_fmt(rep.eval_spiteful)} "
        f"eval_altruistic={_fmt(rep.eval_altruistic)} nearest_grid_hits={hits}/{len(rep.records)}"
    )


def cmd_transfer(args, out: Path) -> str:
    A, B = opponent_sim.transfer_games(args.seed, args.small, args.large)
    lam = args.lambda_true
    if lam is None:
        grid = sweep_lab.DEFAULT_GRID
        lam = grid[int(np.random.default_rng([args.seed, 2]).integers(len(grid)))]
    res = opponent_sim.transfer_experiment(A, B, lam, args.x_rounds, np.random.default_rng([args.seed, 1]))
    opponent_sim.write_transfer_csv(res, out / "transfer.csv")
    return (
        f"lambda_true={lam:.1f} warm_rounds={res.warm_total} lambda_hat_warm={res.lambda_hat_warm:.1f} "
        f"cold_rounds={res.cold_rounds} lambda_hat_cold={res.lambda_hat_cold:.1f}"
    )


def decomposition_deviation(G: BimatrixGame, lam: float) -> float:
    """Deviation of the equal-behaviour modified game from its zero-sum / common-payoff split."""
    Gp = modified_game(G, LambdaPair(lam, lam))
    a, b = (1.0 - lam) / 2.0, (1.0 + lam) / 2.0
    S = G.R + G.C
    R2 = a * (G.R - G.C) + b * S
    C2 = a * (G.C - G.R) + b * S
    return float(max(np.abs(Gp.R - R2).max(), np.abs(Gp.C - C2).max()))


def cmd_verify(args, out: Path) -> str:
    if args.game is not None or args.catalog is not None:
        games = [_load(args)]
    else:
        rng = np.random.default_rng(args.seed)
        games = []
        for _ in range(args.games):
            m, n = (int(v) for v in rng.integers(2, 8, size=2))
            games.append(BimatrixGame(rng.random((m, n)), rng.random((m, n))))
    grid = sweep_lab.DEFAULT_GRID
    ident = 0.0
    decomp = 0.0
    for G in games:
        for lr in grid:
            for lc in grid:
                if abs(lr * lc - 1.0) < 1e-12:
                    continue
                ident = max(ident, verify_reduction_identity(G, LambdaPair(lr, lc)))
            decomp = max(decomp, decomposition_deviation(G, lr))
    lines = [f"games={len(games)}", f"identity_max_dev={ident:.3e}", f"decomposition_max_dev={decomp:.3e}"]
    (out / "verify.txt").write_text("\n".join(lines) + "\n")
    return " ".join(lines)


COMMANDS = {
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "alternate": cmd_alternate,
    "theorem2": lambda a, o: _theorem(a, o, 2),
    "theorem3": lambda a, o: _theorem(a, o, 3),
    "opponents": cmd_opponents,
    "transfer": cmd_transfer,
    "verify": cmd_verify,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(message)s")
    out = args.out if args.out is not None else Path(os.environ.get(OUT_ENV, "."))
    try:
        out.mkdir(parents=True, exist_ok=True)
        summary = COMMANDS[args.command](args, out)
    except InputError as exc:
        print(f"altnash: error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"altnash: numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"altnash: error: {exc}", file=sys.stderr)
        return 1
    print(summary)
    return 0


def main() -> None:
    sys.exit(run())
