"""Command line entry point: ``epsense {sweep,point,threshold,check}``."""
from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import active, checks, model, sweep
from .config import load_config
from .errors import ConfigError, EpsenseError, IoError

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3


def _common(parser, suppress):
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="JSON config file")
    parser.add_argument("--out", default=default, help="output path (default stdout)")
    parser.add_argument("--format", choices=("csv", "json"),
                        default=argparse.SUPPRESS if suppress else "csv")
    parser.add_argument("--jobs", type=int, default=default,
                        help="worker processes (EPSENSE_JOBS overrides)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="epsense",
                                 description="QFI of coupled-cavity sensors near exceptional points")
    _common(ap, suppress=False)
    sub = ap.add_subparsers(dest="command", required=True)
    for name, text in (("sweep", "run a parameter sweep and emit CSV or JSON"),
                       ("point", "evaluate the config at one point and print JSON"),
                       ("threshold", "print the lasing threshold and EP locations"),
                       ("check", "run the oracle-agreement checks")):
        sp = sub.add_parser(name, help=text)
        _common(sp, suppress=True)
        if name == "point":
            sp.add_argument("--at", type=float, help="sweep-variable value (default: sweep start)")
    return ap


def resolve_jobs(flag) -> int:
    env = os.environ.get("EPSENSE_JOBS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ConfigError([("EPSENSE_JOBS", f"not an integer: {env!r}")])
        if n < 1:
            raise ConfigError([("EPSENSE_JOBS", "must be >= 1")])
        return n
    if flag is not None and flag < 1:
        raise ConfigError([("--jobs", "must be >= 1")])
    return flag


def _need_config(args):
    if not args.config:
        raise ConfigError([("--config", f"required for '{args.command}'")])
    try:
        return load_config(args.config)
    except OSError as exc:
        raise IoError(f"cannot read {args.config}: {exc}") from exc


def _write_text(text: str, path):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    return obj


def cmd_sweep(args) -> int:
    cfg = _need_config(args)
    jobs = resolve_jobs(args.jobs)
    result = sweep.run_sweep(cfg, jobs=jobs)
    sweep.emit(result, args.format, args.out)
    return EXIT_OK


def cmd_point(args) -> int:
    cfg = _need_config(args)
    x = cfg.start if args.at is None else args.at
    s_c = sweep.threshold_of(cfg) if cfg.sweep_var == "s_z" and cfg.units == "threshold" else None
    row = sweep.evaluate_point(cfg, x, s_c)
    row.pop("_quad_error", None)
    _write_text(json.dumps(row, allow_nan=False) + "\n", args.out)
    return EXIT_OK


def cmd_threshold(args) -> int:
    cfg = _need_config(args)
    p = cfg.passive
    g_ep, eps_ep = model.ep_location(p)
    out = {"passive_ep_g": g_ep, "passive_ep_epsilon": eps_ep,
           "passive_ep_g_bare": model.ep_location_bare(p)[0]}
    if cfg.system == "active":
        a = active.ActiveSystem(p, cfg.gain)
        out["s_c"] = active.lasing_threshold(a)
        out["s_c_scan"] = active.singularity_scan(a, mode=cfg.gain_mode)
        out["s_z_ep"] = active.ep_inversion(a)
        out["s_z_ep_over_s_c"] = out["s_z_ep"] / out["s_c"]
    _write_text(json.dumps(_json_safe(out), allow_nan=False) + "\n", args.out)
    return EXIT_OK


def cmd_check(args) -> int:
    results = checks.run_all()
    lines = [f"{'PASS' if ok else 'FAIL'}  {name}  (worst rel err {err:.3g})"
             for name, ok, err in results]
    _write_text("\n".join(lines) + "\n", args.out)
    return EXIT_OK if all(ok for _, ok, _ in results) else EXIT_NUMERIC


COMMANDS = {"sweep": cmd_sweep, "point": cmd_point, "threshold": cmd_threshold,
            "check": cmd_check}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        for path, msg in exc.violations:
            print(f"config error: {path}: {msg}" if path else f"config error: {msg}",
                  file=sys.stderr)
        return EXIT_CONFIG
    except (IoError, OSError) as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (EpsenseError, ArithmeticError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
