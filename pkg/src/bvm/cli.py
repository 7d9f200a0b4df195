"""``bvm`` command line.

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical failures.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import BvmError, ConfigError, InvalidInput
from .experiments import (
    REGIMES,
    ExperimentConfig,
    bounds_json,
    run_bounds,
    run_critdim,
    run_glm_check,
    run_sweep,
)
from .models.glm import FAMILIES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def parse_pairs(text):
    """``"200:8000000,400:64000000"`` -> ``[(200, 8000000), (400, 64000000)]``."""
    pairs = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        try:
            p, n = item.split(":")
            pairs.append((int(p), int(float(n))))
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad pair {item!r}; expected p:n") from exc
    if not pairs:
        raise argparse.ArgumentTypeError("no pairs given")
    return pairs


def _add_common(sp):
    sp.add_argument("--reps", type=int, default=200, help="replications R")
    sp.add_argument("--draws", type=int, default=1000, help="posterior draws per replicate K")
    sp.add_argument("--mu", type=float, default=1.0, help="prior mean of the exponential prior")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", default=None, help="output directory")
    sp.add_argument("--single-data", action="store_true", help="fix one data set and draw R*K posterior samples")
    sp.add_argument("--threads", type=int, default=1)


def build_parser():
    parser = argparse.ArgumentParser(prog="bvm", description="Bernstein-von Mises experiments and error budgets")
    sub = parser.add_subparsers(dest="command", required=True)

    cd = sub.add_parser("critdim", help="standardized posterior of the grouped Poisson target")
    cd.add_argument("--p", type=int, default=1000, help="number of groups p_n")
    group = cd.add_mutually_exclusive_group()
    group.add_argument("--regime", choices=REGIMES, default=None)
    group.add_argument("--m", type=int, default=None, help="group size m_n (overrides the regime)")
    cd.add_argument("--keep-draws", action="store_true", help="also write draws.csv")
    _add_common(cd)

    sw = sub.add_parser("sweep", help="posterior shift against dimension")
    sw.add_argument("--pairs", type=parse_pairs, required=True, help="comma-separated p:n pairs")
    _add_common(sw)

    gc = sub.add_parser("glm-check", help="GLM posterior against its Gaussian approximation")
    gc.add_argument("--family", choices=FAMILIES, default="logistic")
    gc.add_argument("--n", type=int, default=500)
    gc.add_argument("--p-star", type=int, default=2)
    gc.add_argument("--seed", type=int, default=0)
    gc.add_argument("--x", type=float, default=3.0, help="deviation level of the budget")
    gc.add_argument("--theta-mode", choices=("oracle", "mle"), default="oracle")
    gc.add_argument("--sampler-draws", type=int, default=20_000, help="0 skips the sampler")
    gc.add_argument("--out", default=None)

    bd = sub.add_parser("bounds", help="evaluate an error budget from a JSON file")
    bd.add_argument("--config", required=True)
    bd.add_argument("--out", default=None, help="write the JSON here instead of stdout")
    return parser


def _config_from_args(args):
    if args.command == "critdim":
        return ExperimentConfig(
            kind="critdim", p_n=args.p, m_n=args.m,
            beta_regime=None if args.m is not None else (args.regime or "unit"),
            replications=args.reps, draws_per_replicate=args.draws, prior_scale=args.mu,
            seed=args.seed, single_data=args.single_data, keep_draws=args.keep_draws,
            threads=args.threads, out_dir=args.out,
        )
    if args.command == "sweep":
        return ExperimentConfig(
            kind="sweep", beta_regime=None, pairs=args.pairs, replications=args.reps,
            draws_per_replicate=args.draws, prior_scale=args.mu, seed=args.seed,
            single_data=args.single_data, threads=args.threads, out_dir=args.out,
        )
    return ExperimentConfig(
        kind="glm-check", beta_regime=None, family=args.family, n=args.n, p_star=args.p_star,
        seed=args.seed, x=args.x, theta_mode=args.theta_mode, sampler_draws=args.sampler_draws,
        out_dir=args.out,
    )


def _print(obj):
    print(json.dumps(obj, indent=2, sort_keys=True))


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "bounds":
            text = bounds_json(run_bounds(args.config))
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
            return EXIT_OK
        config = _config_from_args(args)
        runner = {"critdim": run_critdim, "sweep": run_sweep, "glm-check": run_glm_check}[args.command]
        result = runner(config)
        result = {k: v for k, v in result.items() if k != "provenance"}
        _print(result)
        return EXIT_OK
    except ConfigError as exc:
        field = f" (field: {exc.field})" if exc.field else ""
        print(f"bvm: config error{field}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidInput as exc:
        print(f"bvm: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BvmError, FloatingPointError, ArithmeticError) as exc:
        print(f"bvm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
