"""``gsbm-lab`` command line: trial, sweep, threshold, params."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import asdict

from .experiment import (
    ESTIMATORS,
    ConfigError,
    TrialPoint,
    build_config,
    parse_config_text,
    run_sweep,
    run_trial,
    trial_seed,
)
from .theory import InfeasibleParameters, classify_regime, solve_parameters, threshold_curve

EXIT_CONFIG = 2


def _model_flags(p: argparse.ArgumentParser, grid: bool) -> None:
    kw = {"action": "append"} if grid else {}
    p.add_argument("--lambda", dest="lam", **kw, help="intensity (repeat or comma-separate for a grid)" if grid else "intensity")
    p.add_argument("--n", **kw)
    p.add_argument("--a", **kw)
    p.add_argument("--b", **kw)
    p.add_argument("--d", **kw)


def _block_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--chi", help="block volume factor override")
    p.add_argument("--delta", help="occupancy threshold override")
    p.add_argument("--estimator", choices=ESTIMATORS)
    p.add_argument("--config", help="key = value file; flags override its values")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gsbm-lab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("trial", help="run one seeded trial and print its result as JSON")
    _model_flags(t, grid=False)
    _block_flags(t)
    t.add_argument("--seed", default=None)

    s = sub.add_parser("sweep", help="run a grid of trials and write CSV")
    _model_flags(s, grid=True)
    _block_flags(s)
    s.add_argument("--trials")
    s.add_argument("--seed")
    s.add_argument("--out", help="CSV path (default: stdout)")
    s.add_argument("--no-timings", action="store_true", help="write 0 for timing columns (byte-reproducible)")

    th = sub.add_parser("threshold", help="critical intensity for given a, b, d")
    th.add_argument("--a", type=float, required=True)
    th.add_argument("--b", type=float, required=True)
    th.add_argument("--d", type=int, required=True)

    pp = sub.add_parser("params", help="print derived block parameters")
    _model_flags(pp, grid=False)
    pp.add_argument("--config")
    return parser


def _gather(args, keys) -> dict[str, list[str]]:
    out = {}
    for key in keys:
        attr = "lam" if key == "lambda" else key
        val = getattr(args, attr, None)
        if val is None:
            continue
        out[key] = val if isinstance(val, list) else [str(val)]
    return out


def _load_config(args, keys):
    file_values = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_values = parse_config_text(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    return build_config(file_values, _gather(args, keys))


def _single_point(args) -> tuple[TrialPoint, int]:
    keys = ["lambda", "n", "a", "b", "d", "chi", "delta", "estimator", "seed"]
    cfg = _load_config(args, keys)
    points = cfg.points()
    if len(points) != 1:
        raise ConfigError("this command takes a single parameter point")
    return points[0], cfg.seed


def cmd_trial(args) -> int:
    point, seed = _single_point(args)
    res = run_trial(point, trial_seed(seed, 0, 0))
    payload = asdict(res)
    payload["params"] = asdict(res.params)
    print(json.dumps(payload, indent=2, default=str))
    return 0


def cmd_sweep(args) -> int:
    keys = ["lambda", "n", "a", "b", "d", "chi", "delta", "estimator", "trials", "seed", "out"]
    cfg = _load_config(args, keys)
    if args.no_timings:
        cfg.timings = False
    text = run_sweep(cfg)
    if not cfg.out:
        sys.stdout.write(text)
    return 0


def cmd_threshold(args) -> int:
    thr = threshold_curve(args.a, args.b, args.d)
    payload = {"lambda_star": thr.lambda_star, "effective": thr.effective}
    print(json.dumps({k: (v if math.isfinite(v) else "inf") for k, v in payload.items()}))
    return 0


def cmd_params(args) -> int:
    point, _ = _single_point(args)
    payload = {"regime": classify_regime(point.params).value}
    try:
        payload.update(solve_parameters(point.params).as_dict())
    except InfeasibleParameters as exc:
        payload["error"] = str(exc)
    print(json.dumps(payload, indent=2))
    return 0


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handlers = {"trial": cmd_trial, "sweep": cmd_sweep, "threshold": cmd_threshold, "params": cmd_params}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
