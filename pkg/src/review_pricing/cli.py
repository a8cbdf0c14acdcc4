"""Command line entry point: ``review-pricing {run,sweep,validate,hard-instance}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .buyers import parse_buyer
from .experiments import (
    ExperimentConfig,
    run_sweep,
    validate_pessimism_coverage,
    validate_rev_oracle,
)
from .instances import build_hard_instance, build_random_instance
from .market import ProblemInstance
from .sellers import FixedPrice, TwoPhasePricing, parse_policy
from .simulation import run_episode

log = logging.getLogger("review_pricing")


def _cmd_run(args) -> int:
    if args.config:
        cfg = ExperimentConfig.load(args.config)
        T = args.T or cfg.horizons[0]
        instance = cfg.instance_for(T)
        policy = cfg.policy_for(args.policy or cfg.policies[0], instance)
        buyer = cfg.buyer_model()
        seed = cfg.base_seed if args.seed is None else args.seed
    else:
        if not args.instance:
            raise SystemExit("run needs --config or --instance")
        instance = ProblemInstance.load(args.instance)
        if args.T:
            instance = instance.with_horizon(args.T)
        policy = parse_policy(
            args.policy or "two_phase",
            instance,
            lam=args.lam,
            phase1_constant=args.phase1_constant,
            eta=args.eta,
        )
        buyer = parse_buyer(args.buyer, args.eta)
        seed = args.seed or 0
    trace = run_episode(instance, policy, buyer, seed)
    if args.out:
        trace.to_csv(args.out)
    else:
        sys.stdout.write(trace.to_csv())
    log.info("T=%d revenue=%r regret=%r", trace.T, trace.total_revenue, trace.regret)
    return 0


def _cmd_sweep(args) -> int:
    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.output_dir = str(Path(args.out).resolve())
    result = run_sweep(cfg, jobs=args.jobs)
    print(result.exponent_csv(), end="")
    return 0


def _cmd_validate(args) -> int:
    ok = True
    inst = build_random_instance(3, seed=args.seed, T=args.T, noise="bernoulli")
    for policy in (TwoPhasePricing(phase1_constant=0.5, eta=args.eta), FixedPrice(0.3)):
        rep = validate_pessimism_coverage(inst, policy, args.episodes, args.eta, args.seed, args.jobs)
        status = "PASS" if rep.passed else "FAIL"
        print(
            f"{status} coverage {type(policy).__name__}: "
            f"violation rate {rep.violation_rate:.4f} <= {rep.bound:.4f}"
        )
        ok &= rep.passed
    for k in range(args.instances):
        inst = build_random_instance(int(1 + k % 8), seed=args.seed + k)
        rep = validate_rev_oracle(inst, n=args.draws, seed=args.seed + k)
        status = "PASS" if rep.passed else "FAIL"
        print(f"{status} rev oracle instance {k} (d={inst.d}): max deviation {rep.max_deviation:.3g}")
        ok &= rep.passed
    return 0 if ok else 1


def _cmd_hard_instance(args) -> int:
    inst = build_hard_instance(args.T, args.d, args.eta)
    text = json.dumps(inst.to_dict(), indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="review-pricing", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one episode and emit its trace CSV")
    run.add_argument("--config", type=Path)
    run.add_argument("--instance", type=Path, help="instance JSON file (instead of --config)")
    run.add_argument("--policy", help='"two_phase", "fixed:<p>" or "oracle"')
    run.add_argument("--buyer", default="exact_lb")
    run.add_argument("--eta", type=float, default=0.1)
    run.add_argument("--lambda", dest="lam", default="auto")
    run.add_argument("--phase1-constant", type=float, default=2.0)
    run.add_argument("--T", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--out", type=Path)
    run.set_defaults(func=_cmd_run)

    sweep = sub.add_parser("sweep", help="run a config's replicate sweep and fit exponents")
    sweep.add_argument("config", type=Path)
    sweep.add_argument("--jobs", type=int)
    sweep.add_argument("--out", type=Path, help="override the config's output_dir")
    sweep.set_defaults(func=_cmd_sweep)

    val = sub.add_parser("validate", help="pessimism coverage and revenue-oracle checks")
    val.add_argument("--episodes", type=int, default=2000)
    val.add_argument("--T", type=int, default=300)
    val.add_argument("--eta", type=float, default=0.1)
    val.add_argument("--instances", type=int, default=10)
    val.add_argument("--draws", type=int, default=100_000)
    val.add_argument("--seed", type=int, default=0)
    val.add_argument("--jobs", type=int, default=1)
    val.set_defaults(func=_cmd_validate)

    hard = sub.add_parser("hard-instance", help="print the lower-bound instance as JSON")
    hard.add_argument("--T", type=int, required=True)
    hard.add_argument("--d", type=int, default=3)
    hard.add_argument("--eta", type=float, default=0.1)
    hard.add_argument("--out", type=Path)
    hard.set_defaults(func=_cmd_hard_instance)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "lam", None) not in (None, "auto"):
        args.lam = float(args.lam)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
