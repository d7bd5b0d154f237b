"""Command-line front end: ``spreadgreeks {price,greeks,compare}``.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from .core import GREEKS, MarketParams, ParameterError, SvParams
from .estimators import (
    METHODS,
    BumpTooSmall,
    FdBumps,
    NumericalFailure,
    RunSpec,
    compare_report,
    greeks_report,
    price_report,
)
from .paths import DEFAULT_BATCH_SIZE, SeedSpec, dump_drivers
from .payoff import LocalizationSpec

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

DEFAULT_MARKET = dict(x1=100.0, x2=110.0, sigma1=0.2, sigma2=0.3, rho=0.5, r=0.05, strike=10.0, maturity=1.0)
DEFAULT_PATHS = 1_000_000
RUN_KEYS = {"n_paths", "seed", "antithetic", "localization", "fd_bumps", "threads"}
OUTPUT_KEYS = {"format", "path"}


class ConfigError(ValueError):
    pass


@dataclass
class Config:
    spec: RunSpec
    format: str = "csv"
    path: str | None = None


def _check_keys(section: str, data, allowed) -> None:
    if not isinstance(data, dict):
        raise ConfigError(f"InvalidConfig: section {section!r} must be an object")
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise ConfigError(f"UnknownKey: {section} has unknown key(s) {', '.join(unknown)}")


def parse_config(doc: dict) -> Config:
    """Build a :class:`Config` from a parsed JSON document.

    Exactly one of ``gbm``/``sv`` must be present; unknown keys are rejected.
    """
    _check_keys("config", doc, {"gbm", "sv", "run", "output"})
    models = [k for k in ("gbm", "sv") if k in doc]
    if len(models) != 1:
        raise ConfigError(f"InvalidConfig: expected exactly one model section (gbm or sv), found {len(models)}")
    if models[0] == "gbm":
        params = MarketParams.from_dict(doc["gbm"])
    else:
        params = SvParams.from_dict(doc["sv"])

    run = doc.get("run", {})
    _check_keys("run", run, RUN_KEYS)
    seed = run.get("seed", {})
    if isinstance(seed, int):
        seed = {"master_seed": seed}
    _check_keys("run.seed", seed, {"master_seed", "batch_size"})
    bumps = run.get("fd_bumps", {})
    _check_keys("run.fd_bumps", bumps, {"delta", "gamma", "vega"})
    loc = run.get("localization")
    if loc is not None:
        _check_keys("run.localization", loc, {"a"})
    spec = RunSpec(
        params=params,
        n_paths=int(run.get("n_paths", DEFAULT_PATHS)),
        seed=SeedSpec(int(seed.get("master_seed", 0)), int(seed.get("batch_size", DEFAULT_BATCH_SIZE))),
        antithetic=bool(run.get("antithetic", False)),
        localization=LocalizationSpec(float(loc["a"])) if loc else None,
        fd_bumps=FdBumps(**{k: float(v) for k, v in bumps.items()}),
        threads=run.get("threads"),
    )
    out = doc.get("output", {})
    _check_keys("output", out, OUTPUT_KEYS)
    return Config(spec, out.get("format", "csv"), out.get("path"))


def load_config(path: str | None) -> Config:
    if path is None:
        return parse_config({"gbm": DEFAULT_MARKET})
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"InvalidConfig: cannot read {path}: {exc}") from exc
    return parse_config(doc)


def _apply_flags(cfg: Config, args) -> Config:
    spec = cfg.spec
    if args.seed is not None:
        spec = replace(spec, seed=replace(spec.seed, master_seed=args.seed))
    if args.paths is not None:
        spec = replace(spec, n_paths=args.paths)
    if args.threads is not None:
        spec = replace(spec, threads=args.threads)
    elif spec.threads is None:
        spec = replace(spec, threads=os.cpu_count() or 1)
    if args.localize is not None:
        spec = replace(spec, localization=LocalizationSpec(args.localize))
    bumps = {k: getattr(args, f"bump_{k}") for k in ("delta", "gamma", "vega")}
    bumps = {k: v for k, v in bumps.items() if v is not None}
    if bumps:
        spec = replace(spec, fd_bumps=replace(spec.fd_bumps, **bumps))
    if args.steps is not None:
        if not isinstance(spec.params, SvParams):
            raise ConfigError("InvalidConfig: --steps applies to the sv model only")
        spec = replace(spec, params=spec.params.replace(n_steps=args.steps))
    fmt = args.format or cfg.format
    if fmt not in ("csv", "json"):
        raise ConfigError(f"InvalidConfig: unknown format {fmt!r}")
    return Config(spec.validated(), fmt, args.out or cfg.path)


def _split(value: str, allowed, what: str) -> list[str]:
    items = [v.strip() for v in value.split(",") if v.strip()]
    if items == ["all"]:
        return list(allowed)
    bad = [v for v in items if v not in allowed]
    if bad or not items:
        raise ConfigError(f"Unknown{what}: {', '.join(bad) or value!r}; expected {', '.join(allowed)} or all")
    return items


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--seed", type=int, help="master seed (default 0)")
    common.add_argument("--paths", type=int, help="number of Monte Carlo paths")
    common.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--localize", type=float, metavar="A", help="localization half-width")
    common.add_argument("--bump-delta", type=float)
    common.add_argument("--bump-gamma", type=float)
    common.add_argument("--bump-vega", type=float)
    common.add_argument("--steps", type=int, help="Euler steps (sv model only)")
    common.add_argument("--dump-paths", metavar="PATH", help="write driver summaries as raw <f8 records")
    common.add_argument("--timing", action="store_true", help="fill the wall_ms column (breaks byte-reproducibility)")

    parser = argparse.ArgumentParser(prog="spreadgreeks", description="Monte Carlo Greeks for two-asset spread calls.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("price", parents=[common], help="price the spread call")
    g = sub.add_parser("greeks", parents=[common], help="estimate selected Greeks")
    g.add_argument("--greeks", default="all", help="comma list of " + ", ".join(GREEKS) + " or all")
    g.add_argument("--methods", default="malliavin,fd", help="comma list of " + ", ".join(METHODS) + " or all")
    sub.add_parser("compare", parents=[common], help="all methods on shared paths with variance ratios")
    return parser


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _apply_flags(load_config(args.config), args)
        if args.command == "greeks":
            greeks = _split(args.greeks, GREEKS, "Greek")
            methods = _split(args.methods, METHODS, "Method")
        drivers = cfg.spec.simulate()
        if args.dump_paths:
            dump_drivers(drivers, args.dump_paths)
        if args.command == "price":
            report = price_report(cfg.spec, drivers=drivers, timing=args.timing)
        elif args.command == "greeks":
            report = greeks_report(cfg.spec, greeks, methods, drivers=drivers, timing=args.timing)
        else:
            report = compare_report(cfg.spec, drivers=drivers, timing=args.timing)
    except (ParameterError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, BumpTooSmall, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    text = report.to_csv() if cfg.format == "csv" else report.to_json()
    if cfg.path:
        Path(cfg.path).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())
