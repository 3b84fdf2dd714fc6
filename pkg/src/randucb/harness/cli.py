"""Command-line interface.

Subcommands: ``run`` executes an experiment config and writes aggregate CSVs,
``bounds`` evaluates a closed-form regret bound, ``sweep`` reruns a config
over a grid of values for one key. Exit codes: 0 success, 1 configuration
error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from pathlib import Path

from ..bounds import BoundReport, glb_minimax_bound, linear_minimax_bound, \
    mab_gap_bound, mab_minimax_bound
from ..linear import fixed_mode_c1
from .config import ConfigError, PolicySpec, build_experiment_config, parse_kv_file
from .registry import build_zdist
from .runner import aggregate, run_experiment, write_csv

_BOUND_KINDS = ("mab", "mab_gap", "linear", "glb")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="randucb")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config and write CSVs")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)

    p_bounds = sub.add_parser("bounds", help="evaluate a closed-form regret bound")
    p_bounds.add_argument("--config", required=True)

    p_sweep = sub.add_parser("sweep", help="rerun a config over values of one key")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--param", required=True, help="config key to vary")
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--out", required=True)
    return parser


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _print_report(kind: str, report: BoundReport) -> None:
    fields = {"kind": kind}
    fields.update(report.as_dict())
    for key, value in fields.items():
        print(f"{key} = {_fmt(value)}")
    print(",".join(fields))
    print(",".join(_fmt(v) for v in fields.values()))


def _pop_req_float(raw: dict, key: str) -> float:
    if key not in raw:
        raise ConfigError(f"{key}: required")
    value = raw.pop(key)
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {value!r}") from None


def _pop_req_int(raw: dict, key: str) -> int:
    if key not in raw:
        raise ConfigError(f"{key}: required")
    value = raw.pop(key)
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {value!r}") from None


def _cmd_bounds(path: str) -> int:
    raw = parse_kv_file(path)
    kind = raw.pop("bound.kind", None)
    if kind not in _BOUND_KINDS:
        raise ConfigError(f"bound.kind: expected one of {', '.join(_BOUND_KINDS)}")
    horizon = _pop_req_int(raw, "bound.T")
    c2 = float(raw.pop("bound.c2")) if "bound.c2" in raw else None
    zparams = {k: raw.pop(k) for k in list(raw) if k.startswith("zdist.")}

    if kind in ("mab", "mab_gap"):
        n_arms = _pop_req_int(raw, "bound.K")
        default_upper = 2.0 * math.sqrt(math.log(horizon))
    elif kind == "linear":
        d = _pop_req_int(raw, "bound.d")
        lam = _pop_req_float(raw, "bound.lambda")
        default_upper = 3.0 * fixed_mode_c1(d, horizon, lam)
    else:
        d = _pop_req_int(raw, "bound.d")
        mu = _pop_req_float(raw, "bound.mu")
        lipschitz = _pop_req_float(raw, "bound.lipschitz")
        rho = _pop_req_float(raw, "bound.rho")
        c1 = math.sqrt(d * math.log(horizon / d) + 2.0 * math.log(horizon)) / (2.0 * mu)
        default_upper = 2.0 * math.sqrt(lipschitz) * c1

    gaps = None
    if kind == "mab_gap":
        if "bound.gaps" not in raw:
            raise ConfigError("bound.gaps: required (comma-separated)")
        try:
            gaps = [float(v) for v in raw.pop("bound.gaps").split(",")]
        except ValueError:
            raise ConfigError("bound.gaps: expected comma-separated numbers") from None

    if raw:
        raise ConfigError(f"{sorted(raw)[0]}: unknown key")
    z = build_zdist(PolicySpec(label="bound", kind="bound", params=zparams),
                    default_upper, horizon=horizon)

    if kind == "mab":
        report = mab_minimax_bound(n_arms, horizon, z, c2)
    elif kind == "mab_gap":
        report = mab_gap_bound(gaps, z, horizon, n_arms)
    elif kind == "linear":
        report = linear_minimax_bound(d, horizon, lam, z, c2)
    else:
        report = glb_minimax_bound(d, horizon, mu, lipschitz, rho, z, c2)
    _print_report(kind, report)
    return 0


def _cmd_run(config_path: str, out_dir: str) -> int:
    raw = parse_kv_file(config_path)
    config = build_experiment_config(raw)
    rows = aggregate(run_experiment(config))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    target = out / (Path(config_path).stem + ".csv")
    write_csv(rows, target)
    print(target)
    return 0


def _sanitize(token: str) -> str:
    return re.sub(r"[^-.\w]", "_", token)


def _cmd_sweep(config_path: str, param: str, values: str, out_dir: str) -> int:
    base = parse_kv_file(config_path)
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not items:
        raise ConfigError("--values: empty list")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(config_path).stem
    for value in items:
        raw = dict(base)
        raw[param] = value
        config = build_experiment_config(raw)
        rows = aggregate(run_experiment(config))
        target = out / f"{stem}__{_sanitize(param)}={_sanitize(value)}.csv"
        write_csv(rows, target)
        print(target)
    return 0


def cli(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if args.command == "run":
            return _cmd_run(args.config, args.out)
        if args.command == "bounds":
            return _cmd_bounds(args.config)
        return _cmd_sweep(args.config, args.param, args.values, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli(sys.argv[1:]))
