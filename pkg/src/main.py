"""
zzbound - Main Entry Point

Subcommands:
    run       Compute the bound described by an experiment file (CSV to stdout or --out)
    repro     Write a reproduction target as <target>.csv
    selftest  Run the in-package property suite
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml
from pydantic import ValidationError

from src.config.logging_config import configure_logging
from src.config.settings import (
    GRID_CONFIG,
    LOGGING_CONFIG,
    RUNTIME_CONFIG,
    default_oracle,
    default_quadrature,
    default_search,
)
from src.core.exceptions import ConfigError, ConvergenceError, ZZBoundError
from src.models.experiment import ExperimentConfig
from src.services.experiment_service import ExperimentService, selftest
from src.services.repro_service import TARGETS, ReproService
from src.utils.csv_utils import write_csv, write_csv_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_CONVERGENCE = 3


def _error_record(kind: str, message: str, **extra) -> None:
    print(json.dumps({"error": kind, "message": message, **extra}), file=sys.stderr)


def load_experiment(path: Path) -> ExperimentConfig:
    """
    Parse and validate an experiment file (YAML or JSON).

    Raises:
        ConfigError: If the file is missing, unparsable or fails validation
    """
    try:
        with open(path) as f:
            raw = yaml.safe_load(f)
    except (OSError, yaml.YAMLError) as e:
        raise ConfigError(f"cannot read experiment file {path}: {e}")
    if not isinstance(raw, dict):
        raise ConfigError(f"experiment file {path} must contain a mapping")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"invalid experiment file {path}: {e}")


def cmd_run(args) -> int:
    try:
        config = load_experiment(Path(args.config))
    except ConfigError as e:
        _error_record("config", str(e))
        return EXIT_CONFIG

    service = ExperimentService(
        quad=default_quadrature(),
        search=default_search(),
        oracle=default_oracle(),
        n_points=GRID_CONFIG["n_points"],
        threads=RUNTIME_CONFIG["threads"],
        timing=args.timing,
    )
    try:
        rows = service.run(config)
    except ConvergenceError as e:
        _error_record("convergence", str(e), partial_estimate=e.partial_estimate)
        return EXIT_CONVERGENCE
    except (ValidationError, ZZBoundError) as e:
        _error_record("config", str(e))
        return EXIT_CONFIG

    columns = service.columns(rows)
    records = [service.as_record(r) for r in rows]
    out = args.out or config.output
    if out:
        write_csv_file(Path(out), columns, records)
        logger.info(f"Wrote {len(records)} rows to {out}")
    else:
        write_csv(sys.stdout, columns, records)

    strict = args.strict or RUNTIME_CONFIG["strict"]
    if strict and any(r.tail_flag for r in rows):
        _error_record("convergence", "tolerance flag raised with --strict")
        return EXIT_CONVERGENCE
    return EXIT_OK


def cmd_repro(args) -> int:
    service = ReproService(
        n_points=args.n_points,
        threads=RUNTIME_CONFIG["threads"],
        quad=default_quadrature(),
        search=default_search(),
    )
    try:
        path = service.write(args.target, Path(args.out_dir))
    except ConvergenceError as e:
        _error_record("convergence", str(e), partial_estimate=e.partial_estimate)
        return EXIT_CONVERGENCE
    print(path)
    return EXIT_OK


def cmd_selftest(args) -> int:
    results = selftest()
    for name, passed, detail in results:
        print(f"{'✅' if passed else '❌'} {name}: {detail}")
    failed = [name for name, passed, _ in results if not passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zzbound",
        description="Ziv-Zakai family of Bayesian MMSE lower bounds",
    )
    parser.add_argument("--log-level", default=None, help="Logging level (default from config)")
    parser.add_argument("--log-json", action="store_true", help="Emit JSON log records")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Evaluate an experiment file")
    run.add_argument("--config", required=True, help="Experiment file (YAML or JSON)")
    run.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    run.add_argument("--strict", action="store_true", help="Fail on tolerance flags")
    run.add_argument("--timing", action="store_true", help="Fill the wall_time_ms column")
    run.set_defaults(handler=cmd_run)

    repro = sub.add_parser("repro", help="Reproduce a reference table or figure")
    repro.add_argument("target", choices=TARGETS)
    repro.add_argument("--out-dir", default="repro_out", help="Output directory")
    repro.add_argument("--n-points", type=int, default=256, help="Grid points per curve")
    repro.set_defaults(handler=cmd_repro)

    test = sub.add_parser("selftest", help="Run the built-in property checks")
    test.set_defaults(handler=cmd_selftest)
    return parser


def main(argv=None) -> int:
    """Main application entry point."""
    args = build_parser().parse_args(argv)
    configure_logging(
        args.log_level or LOGGING_CONFIG["level"],
        args.log_json or LOGGING_CONFIG["json"],
    )
    logger.debug(f"Running zzbound {args.command}")
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
