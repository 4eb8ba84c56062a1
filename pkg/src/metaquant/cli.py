"""Command-line entrypoint: ``metaquant run <config>`` and ``metaquant report <search.json>``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from dotenv import load_dotenv

from .artifacts import report_policy
from .config import dump_config, load_config
from .constants import DEFAULT_LOG_LEVEL, LOG_LEVEL_ENV
from .errors import ConfigError, FormatError
from .stages import run_stage
from .stages.common import BITWIDTH_CSV_NAME, RESOLVED_CONFIG_NAME
from .telemetry import RunStore, configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="metaquant", description=__doc__)
    parser.add_argument(
        "--log-level",
        default=os.environ.get(LOG_LEVEL_ENV, DEFAULT_LOG_LEVEL),
        help="logging level (default: %(default)s)",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a pipeline stage from a YAML config")
    run.add_argument("config", type=Path)

    report = commands.add_parser("report", help="summarize a search report")
    report.add_argument("search_json", type=Path)
    report.add_argument("--csv", type=Path, default=None, help="also write the normalized-bitwidth CSV here")
    return parser


def cmd_run(config_path: Path, overrides: Sequence[str]) -> int:
    try:
        config = load_config(config_path, overrides)
    except ConfigError as exc:
        logger.error("Invalid config %s: %s", config_path, exc)
        return EXIT_CONFIG
    store = RunStore(config.output_dir)
    try:
        config.output_dir.mkdir(parents=True, exist_ok=True)
        store.add("config", dump_config(config, config.output_dir / RESOLVED_CONFIG_NAME))
        run_stage(config, store)
    except ConfigError as exc:
        logger.error("Invalid config: %s", exc)
        store.mark_failed(str(exc))
        return EXIT_CONFIG
    except Exception as exc:
        logger.exception("Stage %s failed", config.stage.value)
        store.mark_failed(f"{type(exc).__name__}: {exc}")
        return EXIT_FAILED
    logger.info("Stage %s finished; %d artifacts in %s", config.stage.value, len(store.paths()), config.output_dir)
    return EXIT_OK


def cmd_report(search_json: Path, csv_path: Path | None) -> int:
    try:
        summary = report_policy(search_json)
    except FormatError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED
    sys.stdout.write(summary.table)
    target = csv_path if csv_path is not None else search_json.with_name(BITWIDTH_CSV_NAME)
    target.write_text(summary.csv, encoding="utf-8")
    logger.info("Wrote %s", target)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    load_dotenv()
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    configure_logging(args.log_level)
    if args.command == "run":
        return cmd_run(args.config, extra)
    if extra:
        parser.error(f"unrecognized arguments: {' '.join(extra)}")
    return cmd_report(args.search_json, args.csv)


if __name__ == "__main__":
    sys.exit(main())
