"""Command-line entry point: ``approxgi <subcommand> [options]``.

Global options ``--seed``, ``--out`` and ``--config`` may go before or
after the subcommand.  A config file holds ``key = value`` lines (``#`` starts a
comment); its keys fill in option defaults and explicit flags win.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .graph_core import Graph, Instance, gen_gnp, gen_no_instance, gen_yes_instance, make_rng, num_pairs
from .lower_bound_lab import (
    REPLAYABLE,
    STRATEGIES,
    advantage_csv,
    build_hard_no,
    hard_h_budget,
    no_collision_uniformity,
    transcript_advantage,
)
from .pipeline import PipelineConfig, baseline_decide, decide
from .product_walk import chain_spectrum
from .spectral_similarity import SpectralConfig, qpe_spectrum_sample, spectral_decide, spectral_distance
from .szegedy_sim import walk_probe


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def read_config(path: str) -> dict:
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _instance(args, rng) -> Instance:
    if getattr(args, "instance", None):
        return Instance.from_json(Path(args.instance).read_text(encoding="utf-8"))
    if args.label == "yes":
        return gen_yes_instance(args.n, args.epsilon, rng)
    return gen_no_instance(args.n, rng, args.epsilon)


# ---------------------------------------------------------------- commands

def cmd_gen(args, rng):
    return _instance(args, rng).to_json() + "\n"


def cmd_decide(args, rng):
    inst = _instance(args, rng)
    cfg = PipelineConfig.for_n(
        inst.g.n, inst.epsilon, threshold_rule=args.threshold_rule, seed=args.seed, r=args.r, s=args.s,
        search_rounds=args.search_rounds, ae_grid=args.ae_grid,
    )
    return decide(inst.g, inst.h, cfg, rng).to_json() + "\n"


def cmd_baseline(args, rng):
    inst = _instance(args, rng)
    budget = args.budget if args.budget is not None else 2 * num_pairs(inst.g.n)
    answer = baseline_decide(inst.g, inst.h, inst.epsilon, budget, rng)
    return json.dumps({"answer": answer, "budget": budget, "label": inst.label, "seed": args.seed}, sort_keys=True) + "\n"


def cmd_walk_probe(args, rng):
    inst = gen_yes_instance(args.n, args.epsilon, rng)
    traj = walk_probe(inst.g, inst.h, inst.planted, args.steps, args.convention, rng, p_err=args.p_err)
    return traj.to_csv()


def cmd_spectrum_check(args, rng):
    inst = _instance(args, rng)
    return chain_spectrum(inst.g, inst.h).to_csv()


def cmd_accuracy(args, rng):
    return ex.records_to_csv(ex.run_accuracy_sweep(_int_list(args.n_list), args.epsilon, args.trials, rng), "accuracy")


def cmd_scaling(args, rng):
    res = ex.run_scaling(_int_list(args.n_list), args.epsilon, args.target, rng, trials=args.trials)
    text = ex.records_to_csv(res.records, "scaling")
    print(f"quantum_exponent={res.quantum_exponent:.4f} classical_exponent={res.classical_exponent:.4f}", file=sys.stderr)
    return text


def cmd_eps_sweep(args, rng):
    return ex.records_to_csv(ex.run_eps_sweep(args.n, _float_list(args.eps_list), args.trials, rng), "eps")


def cmd_noise_sweep(args, rng):
    recs = ex.run_noise_sweep(_int_list(args.n_list), _float_list(args.p_err_list), rng, args.epsilon, args.trials, args.repeats)
    return ex.records_to_csv(recs, "noise")


def cmd_lb_advantage(args, rng):
    if args.uniformity:
        rep = no_collision_uniformity(args.n, args.epsilon, args.trials, rng)
        return json.dumps(
            {
                "free_frequency": rep.free_frequency,
                "free_sigma": rep.free_sigma,
                "flip_frequency": rep.flip_frequency,
                "flip_sigma": rep.flip_sigma,
                "collision_steps": rep.collision_steps,
            },
            sort_keys=True,
        ) + "\n"
    reports = [
        transcript_advantage(s, args.n, args.epsilon, args.q, args.trials, rng, diagnostics=args.diagnostics)
        for s in args.strategy.split(",")
    ]
    return advantage_csv(reports)


def cmd_lb_hard(args, rng):
    c = num_pairs(args.n)
    while True:
        g = gen_gnp(args.n, 0.5, rng)
        if 4 * g.num_edges >= c:
            break
    budget = hard_h_budget(args.n, args.epsilon)
    strat = REPLAYABLE[args.strategy](int(rng.integers(2**31)), q_g=c // 2, q_h=budget)
    hard = build_hard_no(g, strat, budget, args.epsilon)
    out = {
        "n": args.n,
        "epsilon": args.epsilon,
        "strategy": args.strategy,
        "budget_h": budget,
        "transcripts_equal": hard.transcripts_equal,
        "verdicts_equal": hard.verdict_yes == hard.verdict_no,
        "h_no_edges": hard.h_no.num_edges,
        "g_star": hard.g_star.to_text(),
        "h_no": hard.h_no.to_text(),
    }
    return json.dumps(out, sort_keys=True) + "\n"


def cmd_spectral(args, rng):
    g = gen_gnp(args.n, 0.5, rng)
    if args.pair == "permuted":
        h = Graph.from_matrix(g.matrix[np.ix_(p := rng.permutation(args.n), p)])
    else:
        h = gen_gnp(args.n, 0.5, rng)
    cfg = SpectralConfig.for_n(args.n, args.alpha, args.beta)
    if args.csv:
        return qpe_spectrum_sample(g, cfg, rng).to_csv()
    v = spectral_decide(g, h, cfg, rng)
    return json.dumps(
        {"answer": v.answer, "distance_estimate": v.distance_estimate, "true_distance": spectral_distance(g, h), "charge": v.charge, "flagged": v.flagged},
        sort_keys=True,
    ) + "\n"


def cmd_resources(args, rng):
    recs = [ex.resource_estimate(n, args.epsilon, seed=args.seed) for n in _int_list(args.n_list)]
    return ex.records_to_csv(recs, "resources")


# ---------------------------------------------------------------- parser

def _add_instance_opts(p, n=12):
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--label", choices=["yes", "no"], default="yes")
    p.add_argument("--instance", help="read the instance from a JSON file instead of generating it")


def _add_global_opts(p, default):
    p.add_argument("--seed", type=int, default=0 if default is None else default)
    p.add_argument("--out", default=default, help="write output here instead of stdout")
    p.add_argument("--config", default=default, help="flat key = value file supplying option defaults")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="approxgi", description=__doc__.splitlines()[0])
    _add_global_opts(parser, None)
    # the global options are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    _add_global_opts(common, argparse.SUPPRESS)
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        return sub.add_parser(name, parents=[common], **kw)

    p = add("gen", help="generate a YES or NO instance as JSON")
    _add_instance_opts(p)
    p.set_defaults(func=cmd_gen)

    p = add("decide", help="run the full pipeline, print one verdict JSON line")
    _add_instance_opts(p)
    p.add_argument("--threshold-rule", choices=["min", "plain"], default="min")
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--search-rounds", type=int)
    p.add_argument("--ae-grid", type=int)
    p.set_defaults(func=cmd_decide)

    p = add("baseline", help="run the classical sampling baseline")
    _add_instance_opts(p)
    p.add_argument("--budget", type=int)
    p.set_defaults(func=cmd_baseline)

    p = add("walk-probe", help="matching-set probability along the walk (CSV)")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--convention", choices=["stationary", "vertex_start_cesaro"], default="stationary")
    p.add_argument("--p-err", type=float, default=0.0)
    p.set_defaults(func=cmd_walk_probe)

    p = add("spectrum-check", help="eigenvalues of the product chain (CSV)")
    _add_instance_opts(p, n=6)
    p.set_defaults(func=cmd_spectrum_check)

    p = add("accuracy", help="accuracy sweep over n (CSV)")
    p.add_argument("--n-list", default="6,8,10")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(func=cmd_accuracy)

    p = add("scaling", help="budget needed for a target accuracy (CSV)")
    p.add_argument("--n-list", default="6,8,10,12,14,16,18,20")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--target", type=float, default=0.9)
    p.add_argument("--trials", type=int, default=20)
    p.set_defaults(func=cmd_scaling)

    p = add("eps-sweep", help="accuracy and queries over epsilon (CSV)")
    p.add_argument("--n", type=int, default=14)
    p.add_argument("--eps-list", default="0.01,0.05,0.1,0.2")
    p.add_argument("--trials", type=int, default=50)
    p.set_defaults(func=cmd_eps_sweep)

    p = add("noise-sweep", help="search-and-confirm accuracy under depolarising noise (CSV)")
    p.add_argument("--n-list", default="6,12,20")
    p.add_argument("--p-err-list", default="0,0.0001,0.001,0.01")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--trials", type=int, default=20)
    p.add_argument("--repeats", type=int, default=20)
    p.set_defaults(func=cmd_noise_sweep)

    p = add("lb-advantage", help="distinguishing advantage against the TV bound (CSV)")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--epsilon", type=float, default=0.05)
    p.add_argument("--q", type=int, default=20)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--strategy", default="a,b", help=f"comma list from {sorted(STRATEGIES)}")
    p.add_argument("--diagnostics", action="store_true", help="waive the q <= C(n,2)/2 precondition")
    p.add_argument("--uniformity", action="store_true", help="report collision statistics instead")
    p.set_defaults(func=cmd_lb_advantage)

    p = add("lb-hard", help="build a far NO instance replaying a YES transcript (JSON)")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--epsilon", type=float, default=0.2)
    p.add_argument("--strategy", choices=sorted(REPLAYABLE), default="echo")
    p.set_defaults(func=cmd_lb_hard)

    p = add("spectral", help="spectral similarity decision (JSON) or sampled spectrum (CSV)")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--beta", type=float, default=3.0)
    p.add_argument("--pair", choices=["permuted", "independent"], default="permuted")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_spectral)

    p = add("resources", help="qubit, step and gate estimates (CSV)")
    p.add_argument("--n-list", default="6,8,10,12,14,16,18,20")
    p.add_argument("--epsilon", type=float, default=0.05)
    p.set_defaults(func=cmd_resources)
    return parser


def _subparser(parser: argparse.ArgumentParser, name: str) -> argparse.ArgumentParser:
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _apply_config(parser, argv) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not args.config:
        return args
    values = read_config(args.config)
    sub = _subparser(parser, args.command)
    known = {a.dest for a in parser._actions} | {a.dest for a in sub._actions}
    unknown = sorted(set(values) - known - {"help"})
    if unknown:
        parser.error(f"unknown config keys: {', '.join(unknown)}")
    flags = {a.dest for a in sub._actions if isinstance(a, argparse._StoreTrueAction)}
    for k in flags & set(values):
        values[k] = values[k].lower() in ("1", "true", "yes", "on")
    parser.set_defaults(**{k: v for k, v in values.items() if k in {a.dest for a in parser._actions}})
    sub.set_defaults(**{k: v for k, v in values.items() if k in {a.dest for a in sub._actions} and k not in ("seed", "out", "config")})
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        text = args.func(args, make_rng(args.seed))
    except (ValueError, KeyError, OSError) as exc:
        print(f"approxgi: error: {exc}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8", newline="\n")
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
