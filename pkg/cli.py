import argparse
import json
import logging
import os
import sys
from typing import List, Optional, Tuple

from dotenv import load_dotenv
from pydantic import ValidationError

# Load environment variables from .env file
load_dotenv()

import cli_core
from src.metric.models import parse_model_config
from src.metric.views import ModelConfig
from src.utils.default_config_settings import RunOptions, Tolerances, load_config_from_file, validation_errors
from src.utils.errors import FinslerError, InvalidConfig, OutputError
from src.utils.report_writer import (
    RunManifest,
    path_header,
    rows_to_csv,
    write_manifest,
    write_outputs,
    write_text_atomic,
)

logger = logging.getLogger(__name__)

COMMANDS = ("info", "geodesic", "curvature-scan", "ball-ratio", "entropy", "verify", "oracle-mc")


def configure_logging():
    level = os.getenv("FINSLER_LOGGING_LEVEL", "info").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO), format="%(levelname)s %(name)s: %(message)s")


def parse_config(source: str) -> Tuple[ModelConfig, RunOptions]:
    """Read a config file or inline JSON.

    Either a bare model object ``{"kind": ...}`` or ``{"model": {...}, "options": {...}}``.
    """
    text = source.strip()
    if text.startswith("{"):
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidConfig([("config", f"malformed inline JSON: {e}")])
    else:
        raw = load_config_from_file(source)
    if not isinstance(raw, dict):
        raise InvalidConfig([("config", "configuration must be a JSON object")])
    if "model" in raw:
        unknown = set(raw) - {"model", "options"}
        if unknown:
            raise InvalidConfig([(key, "unknown top-level key") for key in sorted(unknown)])
        model_raw, options_raw = raw["model"], raw.get("options", {})
    else:
        model_raw, options_raw = raw, {}
    config = parse_model_config(model_raw)
    try:
        options = RunOptions.model_validate(options_raw)
    except ValidationError as e:
        raise InvalidConfig(validation_errors(e))
    return config, options


def apply_overrides(options: RunOptions, args: argparse.Namespace) -> RunOptions:
    """Command-line flags win over the config file."""
    merged = options.model_dump()
    for name in ("seed", "resolution", "r_max", "steps", "samples", "mc_samples", "t_window", "point", "geodesic_method"):
        value = getattr(args, name, None)
        if value is not None:
            merged[name] = value
    for name in Tolerances.model_fields:
        value = getattr(args, name, None)
        if value is not None:
            merged["tolerances"][name] = value
    try:
        return RunOptions.model_validate(merged)
    except ValidationError as e:
        raise InvalidConfig(validation_errors(e))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Finsler geometry engine: geodesics, curvature and volume comparison")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        sub = subparsers.add_parser(command)
        sub.add_argument("--config", type=str, required=True, help="JSON file or inline JSON object")
        sub.add_argument("--out", type=str, default=None, help="Output path (stdout when omitted)")
        sub.add_argument("--format", type=str, choices=("csv", "json"), default=None, help="Output format")
        sub.add_argument("--seed", type=int, default=None, help="Seed for every stochastic component (default: 7)")
        sub.add_argument("--resolution", type=int, default=None, help="Direction quadrature nodes (default: 256/1024/4096 for d=2/3/>3)")
        sub.add_argument("--r-max", dest="r_max", type=float, default=None, help="Largest radius or geodesic time (default: 10)")
        sub.add_argument("--steps", type=int, default=None, help="Radius grid size (default: 20)")
        sub.add_argument("--samples", type=int, default=None, help="Curvature samples (default: 20)")
        sub.add_argument("--mc-samples", dest="mc_samples", type=int, default=None, help="Monte Carlo samples (default: 100000)")
        sub.add_argument("--t-window", dest="t_window", type=float, nargs=2, default=None, metavar=("START", "END"),
                         help="Entropy regression window")
        sub.add_argument("--point", type=float, nargs="+", default=None, help="Base point (default: body center or origin)")
        sub.add_argument("--geodesic-method", dest="geodesic_method", type=str, choices=("auto", "integrate"), default=None,
                         help="Geodesics for areas and volumes: closed form when available, or integrated (default: auto)")
        if command == "geodesic":
            sub.add_argument("--direction", type=float, nargs="+", default=None, help="Initial velocity (default: seeded unit vector)")
        for name, field in Tolerances.model_fields.items():
            flag = "--" + name.replace("_", "-")
            kind = int if isinstance(field.default, int) else float
            sub.add_argument(flag, dest=name, type=kind, default=None, help=f"{field.description} (default: {field.default:g})")
    return parser


def _emit(text: str, out: Optional[str]) -> List[str]:
    if out is None:
        sys.stdout.write(text)
        return []
    return [write_text_atomic(text, out)]


def execute(args: argparse.Namespace) -> int:
    config, options = parse_config(args.config)
    options = apply_overrides(options, args)
    model = cli_core.build_model(config, options.tolerances)
    manifest = RunManifest(
        command=args.command,
        config={"model": config.model_dump(), "options": options.model_dump()},
        seeds={"seed": options.seed},
        tolerances=options.tolerances.model_dump(),
    ).start()
    fmt = args.format
    exit_code = 0
    outputs: List[str] = []

    if args.command == "info":
        outputs = _emit(json.dumps(cli_core.run_info(model), indent=2, sort_keys=True) + "\n", args.out)
    elif args.command == "geodesic":
        path = cli_core.run_geodesic(model, options, args.direction)
        outputs = _emit(rows_to_csv(path_header(model.dim), path.rows()), args.out)
    elif args.command == "curvature-scan":
        rows = cli_core.curvature_scan(model, options)
        outputs = _emit(rows_to_csv(cli_core.curvature_header(model.dim), rows), args.out)
    elif args.command == "ball-ratio":
        report = cli_core.ball_ratio(model, options)
        fmt = fmt or "csv"
        if args.out is None:
            _emit(report.to_csv() if fmt == "csv" else report.to_json(), None)
        else:
            outputs = [write_outputs(report, fmt, args.out)]
        exit_code = 1 if report.all_pass is False else 0
    elif args.command == "entropy":
        slope, stderr, window = cli_core.entropy(model, options)
        print(f"{slope:.6g} +/- {stderr:.2g} on [{window[0]:g}, {window[1]:g}]")
        if args.out is not None:
            payload = {"model": model.model_id, "slope": slope, "stderr": stderr, "window": list(window)}
            outputs = [write_text_atomic(json.dumps(payload, indent=2, sort_keys=True) + "\n", args.out)]
    elif args.command == "verify":
        report = cli_core.verify(model, options)
        fmt = fmt or "json"
        if args.out is None:
            _emit(report.to_json() if fmt == "json" else report.to_csv(), None)
        else:
            outputs = [write_outputs(report, fmt, args.out)]
        exit_code = 0 if report.passed else 1
    elif args.command == "oracle-mc":
        row = cli_core.oracle_mc(model, options)
        outputs = _emit(rows_to_csv(cli_core.ORACLE_HEADER, [row]), args.out)
        exit_code = 0 if row[-1] else 1

    for output in outputs:
        write_manifest(manifest.finish(outputs), output)
    return exit_code


def run_command(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv`` and run one subcommand; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        return execute(args)
    except FinslerError as e:
        logger.error(f"{type(e).__name__}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return OutputError.exit_code


def main():
    configure_logging()
    sys.exit(run_command())


if __name__ == '__main__':
    main()
