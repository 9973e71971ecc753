"""Command-line entry point: ``wmlsim {verify,scaling,typical,worstcase,bounds}``.

Values come from, in increasing priority: built-in defaults, the
``WMLSIM_SEED`` environment variable (seed only), a JSON ``--config`` file,
and explicit flags. Exit status is 0 on success, 1 when a checked identity or
bound fails, and 2 on invalid input.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from typing import List, Optional

from .experiments import COMMANDS, ExperimentConfig, UsageError, run, serialize

SEED_ENV = "WMLSIM_SEED"


def _int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wmlsim", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "verify": "check algebraic identities of the construction (d in {2, 3})",
        "scaling": "n-step error against the exact channel over an n grid",
        "typical": "operator-norm concentration of random jump operators",
        "worstcase": "closed-form rank-one instance and its sample count",
        "bounds": "tabulate the sample-complexity bound formulas",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("--config", help="JSON file of option values; flags override it")
        p.add_argument("--d", type=int)
        p.add_argument("--d-list", type=_int_list, help="comma-separated dimensions")
        p.add_argument("--t", type=float)
        p.add_argument("--n-grid", type=_int_list, help="comma-separated step counts")
        p.add_argument("--eps", type=_float_list, help="target error(s), comma-separated")
        p.add_argument("--delta", type=float, help="failure probability")
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--method", choices=["analytic", "brute_force", "stinespring"])
        p.add_argument("--kind", choices=["ginibre", "uniform", "rademacher"])
        p.add_argument("--l-inf-sq", type=float, help="operator norm squared of L (bounds)")
        p.add_argument("--restarts", type=int, help="see-saw restarts (scaling)")
        p.add_argument("--workers", type=int)
        p.add_argument("--out", help="output file; stdout if omitted")
        p.add_argument("--format", choices=["csv", "json"])
    return parser


def _load_config_file(path: str) -> dict:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path!r}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = set(data) - set(ExperimentConfig.field_names()) - {"command"}
    if unknown:
        raise UsageError(f"unknown config keys: {sorted(unknown)}")
    for key in ("d_list", "n_grid", "eps"):
        if key in data and not isinstance(data[key], list):
            data[key] = [data[key]]
    return data


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from None
    if args.config:
        values.update(_load_config_file(args.config))
    for name in ExperimentConfig.field_names():
        v = getattr(args, name, None)
        if v is not None and name != "command":
            values[name] = v
    values["command"] = args.command
    try:
        config = ExperimentConfig(**values)
    except TypeError as exc:
        raise UsageError(str(exc)) from None
    config.validate()
    return config


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        config = resolve_config(args)
        result = run(config)
    except (UsageError, ValueError) as exc:
        print(f"wmlsim: error: {exc}", file=sys.stderr)
        return 2

    text = serialize(result.rows, config.format)
    if config.out:
        with open(config.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    for line in result.report:
        print(line, file=sys.stderr if not config.out and config.command != "verify" else sys.stdout)
    for msg in result.failures:
        print(f"FAIL: {msg}", file=sys.stderr)
    return result.exit_status
