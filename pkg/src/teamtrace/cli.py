"""Command-line interface.

Subcommands: ``compute`` (trace file -> metric report), ``simulate`` (config ->
synthetic trace), ``expect`` (config -> closed-form expectations), ``check``
(validation and identity assertions only). Exit codes: 0 success, 1 validation
failure, 2 usage error. All diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from .records import PARTITION_KEYS, TraceValidationError, validate_trace
from .report import EngineParams, IdentityViolation, compute_report, render
from .simulate import expected_metrics, load_config, simulate_trace
from .trace_io import TraceIOError, load_trace, read_csv, write_jsonl

ENV_SEED = "READINESS_SEED"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teamtrace",
        description="Compute human-AI decision-making readiness metrics from interaction traces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="compute the metric report for a trace file")
    compute.add_argument("--input", required=True, help="trace file (JSONL, or CSV with --csv)")
    compute.add_argument("--csv", action="store_true", help="input is CSV; requires --map")
    compute.add_argument("--map", help="JSON file mapping trace fields to CSV column names")
    compute.add_argument("--group-by", default="", help="comma-separated partition keys")
    compute.add_argument("--format", choices=("json", "markdown"), default="json")
    compute.add_argument("--out", help="output path (default: stdout)")
    compute.add_argument("--window", type=int, help="window length for asymmetry and calibration")
    compute.add_argument("--epsilon", type=float, help="stability tolerance for asymmetry and calibration")
    compute.add_argument("--stability", type=int, help="consecutive stable windows required for calibration")

    simulate = sub.add_parser("simulate", help="generate a synthetic trace from a config")
    simulate.add_argument("--config", required=True, help="simulation config JSON")
    simulate.add_argument("--out", required=True, help="output trace path (JSONL)")

    expect = sub.add_parser("expect", help="print closed-form metric expectations for a config")
    expect.add_argument("--config", required=True, help="simulation config JSON")

    check = sub.add_parser("check", help="validate a trace and run identity assertions")
    check.add_argument("--input", required=True, help="trace file (JSONL)")
    return parser


def _fail(message: str) -> int:
    print(f"teamtrace: {message}", file=sys.stderr)
    return 1


def _usage(message: str) -> int:
    print(f"teamtrace: {message}", file=sys.stderr)
    return 2


def _report_input_error(err: Exception) -> int:
    issues = getattr(err, "issues", None)
    if issues:
        for issue in issues:
            print(f"teamtrace: {issue}", file=sys.stderr)
        print(f"teamtrace: {len(issues)} issue(s) found", file=sys.stderr)
        return 1
    return _fail(str(err))


def _load_input(args: argparse.Namespace):
    path = Path(args.input)
    if not path.exists():
        raise FileNotFoundError(f"input file not found: {path}")
    if getattr(args, "csv", False):
        if not args.map:
            raise _UsageError("--csv requires --map <mapping file>")
        map_path = Path(args.map)
        if not map_path.exists():
            raise FileNotFoundError(f"mapping file not found: {map_path}")
        mapping = json.loads(map_path.read_text("utf-8"))
        records, alphabet, metadata = read_csv(path.read_bytes(), mapping)
        return validate_trace(records, alphabet, metadata=metadata)
    return load_trace(path)


class _UsageError(Exception):
    pass


def _engine_params(args: argparse.Namespace) -> EngineParams:
    params = EngineParams()
    if args.window is not None:
        if args.window < 1:
            raise _UsageError(f"--window must be >= 1, got {args.window}")
        params = replace(params, asymmetry_window=args.window, calibration_window=args.window)
    if args.epsilon is not None:
        if args.epsilon <= 0:
            raise _UsageError(f"--epsilon must be > 0, got {args.epsilon}")
        params = replace(params, asymmetry_epsilon=args.epsilon, calibration_epsilon=args.epsilon)
    if args.stability is not None:
        if args.stability < 1:
            raise _UsageError(f"--stability must be >= 1, got {args.stability}")
        params = replace(params, calibration_stability=args.stability)
    return params


def _cmd_compute(args: argparse.Namespace) -> int:
    keys = [k.strip() for k in args.group_by.split(",") if k.strip()]
    unknown = [k for k in keys if k not in PARTITION_KEYS]
    if unknown:
        return _usage(f"unknown group-by key(s): {', '.join(unknown)}; expected {', '.join(PARTITION_KEYS)}")
    try:
        params = _engine_params(args)
    except _UsageError as e:
        return _usage(str(e))
    try:
        trace = _load_input(args)
    except _UsageError as e:
        return _usage(str(e))
    except FileNotFoundError as e:
        return _fail(str(e))
    except (TraceIOError, TraceValidationError) as e:
        return _report_input_error(e)
    except (ValueError, OSError) as e:
        return _fail(str(e))
    try:
        reports = compute_report(trace, keys, params)
        text = render(reports, args.format, params)
    except IdentityViolation as e:
        print(f"teamtrace: internal error: {e}", file=sys.stderr)
        print(json.dumps(e.dump, sort_keys=True, indent=2), file=sys.stderr)
        return 1
    if args.out:
        Path(args.out).write_text(text, "utf-8")
    else:
        sys.stdout.write(text)
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        return _fail(f"config file not found: {config_path}")
    try:
        config = load_config(config_path)
    except ValueError as e:
        return _report_input_error(e)
    env_seed = os.environ.get(ENV_SEED)
    if env_seed is not None:
        try:
            config = replace(config, seed=int(env_seed))
        except ValueError:
            return _usage(f"{ENV_SEED} must be an integer, got {env_seed!r}")
    trace = simulate_trace(config)
    Path(args.out).write_bytes(write_jsonl(trace))
    print(f"teamtrace: wrote {len(trace)} records to {args.out}", file=sys.stderr)
    return 0


def _cmd_expect(args: argparse.Namespace) -> int:
    config_path = Path(args.config)
    if not config_path.exists():
        return _fail(f"config file not found: {config_path}")
    try:
        config = load_config(config_path)
        expect = expected_metrics(config)
    except ValueError as e:
        return _report_input_error(e)
    doc = {name: round(value, 6) for name, value in expect._asdict().items()}
    sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")
    return 0


def _cmd_check(args: argparse.Namespace) -> int:
    path = Path(args.input)
    if not path.exists():
        return _fail(f"input file not found: {path}")
    try:
        trace = load_trace(path)
    except (TraceIOError, TraceValidationError) as e:
        return _report_input_error(e)
    except (ValueError, OSError) as e:
        return _fail(str(e))
    try:
        compute_report(trace)
    except IdentityViolation as e:
        print(f"teamtrace: internal error: {e}", file=sys.stderr)
        print(json.dumps(e.dump, sort_keys=True, indent=2), file=sys.stderr)
        return 1
    print(f"OK: {len(trace)} records, alphabet size {len(trace.alphabet)}, identities hold")
    return 0


_COMMANDS = {
    "compute": _cmd_compute,
    "simulate": _cmd_simulate,
    "expect": _cmd_expect,
    "check": _cmd_check,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    return _COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
