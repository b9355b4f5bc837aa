"""
cutofflab command line.

  python cutofflab_app.py analyze --scenario rotation51
  python cutofflab_app.py curve --config run.json --threads 4
  python cutofflab_app.py reproduce jacobi-chain

Exit codes: 0 ok, 2 config, 3 unstable drift, 4 moment gate,
5 reproduction failure, 1 any other library error.
"""

import argparse
import json
import logging
import sys

from commands import analyze, curve, reproduce
from components.config import DEFAULT_OUT_DIR, DEFAULT_SEED, config_from_dict, load_run_config, with_overrides
from components.errors import ConfigError, CutoffLabError
from components.scenarios import SCENARIOS
from components.session import clear_run_session, resolve_threads, set_run_session

logger = logging.getLogger("cutofflab")

SCENARIO_FLAGS = ("gamma", "kappa", "lam", "theta", "n", "dim", "s1", "sn")


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _floats(text: str):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help=f"output directory (default {DEFAULT_OUT_DIR})")
    common.add_argument("--seed", type=int, help=f"root seed (default {DEFAULT_SEED})")
    common.add_argument("--threads", type=int, help="worker cap; falls back to CUTOFFLAB_THREADS")
    common.add_argument("--log-level", default="WARNING", choices=["DEBUG", "INFO", "WARNING", "ERROR"])

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--config", help="JSON run configuration")
    system.add_argument("--scenario", choices=sorted(SCENARIOS))
    for name in SCENARIO_FLAGS:
        system.add_argument(f"--{name}", type=int if name in ("n", "dim") else float)
    system.add_argument("--param", type=_param, action="append", default=[], metavar="KEY=VALUE",
                        help="extra scenario parameter, value parsed as JSON")
    system.add_argument("--initial", type=_floats, metavar="X1,X2,...", help="initial state")
    system.add_argument("--p", type=float, help="Wasserstein order")
    system.add_argument("--samples", type=int)
    system.add_argument("--horizon", type=float, help="observation horizon T for the epsilon window")
    system.add_argument("--verbose", action="store_true", help="print a report summary")

    parser = argparse.ArgumentParser(prog="cutofflab", description="Cutoff thermalization of linear SDEs")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("analyze", parents=[common, system], help="spectral analysis and cutoff report")
    sub.add_parser("curve", parents=[common, system], help="empirical profile and dichotomy curves")
    rep = sub.add_parser("reproduce", parents=[common], help="pinned reference checks")
    rep.add_argument("target", choices=sorted(reproduce.TARGETS))
    return parser


def resolve_config(args):
    """Config file first, then flag overrides."""
    if args.config:
        ok, message, cfg = load_run_config(args.config)
        if not ok:
            raise ConfigError(message)
    elif args.scenario:
        cfg = config_from_dict({"scenario": args.scenario})
    else:
        raise ConfigError("give --config or --scenario")

    params = {name: getattr(args, name) for name in SCENARIO_FLAGS if getattr(args, name) is not None}
    params.update(dict(args.param))
    scenario_params = None
    if params or args.scenario:
        base = cfg.scenario_params if args.scenario in (None, cfg.scenario) else {}
        scenario_params = {**base, **params}
    return with_overrides(
        cfg,
        scenario=args.scenario,
        scenario_params=scenario_params,
        initial_state=args.initial,
        p=args.p,
        samples=args.samples,
        horizon=args.horizon,
        seed=args.seed,
        out_dir=args.out,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, args.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        threads = resolve_threads(args.threads)
        if args.command == "reproduce":
            out_dir = args.out or DEFAULT_OUT_DIR
            seed = DEFAULT_SEED if args.seed is None else args.seed
            set_run_session(seed, threads, out_dir)
            reproduce.run(args.target, out_dir, seed)
        else:
            cfg = resolve_config(args)
            set_run_session(cfg.seed, threads, cfg.out_dir)
            if args.command == "analyze":
                analyze.run(cfg, cfg.out_dir, verbose=args.verbose)
            else:
                curve.run(cfg, cfg.out_dir)
    except CutoffLabError as e:
        logger.debug("run failed", exc_info=True)
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    finally:
        clear_run_session()
    return 0


if __name__ == "__main__":
    sys.exit(main())
