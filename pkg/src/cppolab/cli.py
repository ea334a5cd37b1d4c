"""``cppolab`` command line: train, plot, solver-fuzz.

Exit codes: 0 success, 2 bad flags or configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ALGOS, ENVS, load_toml, resolve
from .errors import ConfigError


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cppolab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    tr = sub.add_parser("train", help="run one seeded training job")
    tr.add_argument("--env", choices=ENVS)
    tr.add_argument("--algo", choices=ALGOS)
    tr.add_argument("--seed", type=int)
    tr.add_argument("--config", help="TOML file overriding the built-in defaults")
    tr.add_argument("--out", help="output directory (default ./runs/<env>-<algo>-seed<k>-<hash>)")
    tr.add_argument("--total-steps", type=int, dest="total_steps")
    tr.add_argument("--no-recovery", action="store_const", const=False, dest="recovery",
                    help="disable the recovery update (ablation)")

    pl = sub.add_parser("plot", help="learning curves from metrics CSVs")
    pl.add_argument("metrics", nargs="+")
    pl.add_argument("--out", default=".")
    pl.add_argument("--cost-limit", type=float, dest="cost_limit")

    fz = sub.add_parser("solver-fuzz", help="heuristic vs oracle on random problems")
    fz.add_argument("--count", type=int, default=200)
    fz.add_argument("--seed", type=int, default=0)
    fz.add_argument("--out", default="solver_fuzz.json")
    fz.add_argument("--timings", action="store_true", help="include wall-clock fields")
    return p


def _train(args) -> int:
    from .trainer import run_experiment

    file_layer = load_toml(args.config) if args.config else {}
    flags = {"env": args.env, "algo": args.algo, "seed": args.seed,
             "total_steps": args.total_steps, "recovery": args.recovery}
    cfg = resolve(file_layer, flags)
    manifest = run_experiment(cfg, args.out)
    print(manifest["outputs"]["metrics"])
    return 0


def _plot(args) -> int:
    from .plotting import plot_runs

    for path in plot_runs(args.metrics, args.out, args.cost_limit):
        print(path)
    return 0


def _fuzz(args) -> int:
    from .estep.fuzz import fuzz

    if args.count < 0:
        raise ConfigError("count: must be >= 0")
    report = fuzz(args.count, args.seed, args.timings)
    with open(args.out, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    s = report["summary"]
    print(f"{s['count']} instances, max gap {s['max_gap_range']:.3g} of range, "
          f"all feasible: {s['all_feasible']}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = _parser().parse_args(argv)
    handler = {"train": _train, "plot": _plot, "solver-fuzz": _fuzz}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"cppolab {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
