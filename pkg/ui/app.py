#!/usr/bin/env python
# -*- coding: utf-8 -*-

"""Command-line application."""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, TextIO

from core.errors import EXIT_OK, EXIT_VALIDATION, OscDetectError, exit_code_for
from services.pipeline_service import COMMANDS, PipelineService
from ui.rendering.writers import jsonable
from utils.config import load_scenario
from utils.logger import pipeline_logger

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subcommand per pipeline command."""
    parser = argparse.ArgumentParser(
        prog="osc-detect",
        description="Time-unresolved detection probabilities of oscillating particles.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, type=Path, help="scenario file")
    common.add_argument("--out", type=Path, default=None, help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker threads (default 1)")
    common.add_argument(
        "--quadrature-tol", type=float, default=None, help="relative s-quadrature tolerance"
    )
    common.add_argument(
        "--log-level",
        default="INFO",
        choices=("DEBUG", "INFO", "WARNING", "ERROR"),
        help="stderr log level",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "validate": "check a scenario file and print the normalized configuration",
        "density": "compute detection curves for the configured methods",
        "baselines": "compute and fit the amplitude sum and all three baselines",
        "fit": "fit the configured curves",
        "scan": "fit the wavenumber over the configured thresholds",
    }
    for command in COMMANDS:
        subparsers.add_parser(command, parents=[common], help=helps[command])
    return parser


def run(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None) -> int:
    """
    Run the CLI.

    Args:
        argv: Arguments without the program name
        stdout: Stream for data output (validate prints its JSON here)

    Returns:
        Exit code: 0 ok, 1 validation, 2 accuracy, 3 fit failure
    """
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_VALIDATION

    pipeline_logger.install(getattr(logging, args.log_level))
    pipeline_logger.clear_logs()
    try:
        if args.threads < 1:
            logger.error("--threads must be >= 1, got %d", args.threads)
            return EXIT_VALIDATION
        config = load_scenario(args.scenario)
        out_dir = args.out if args.out is not None else Path(config.output.directory)
        if args.command != "validate":
            pipeline_logger.attach_file(out_dir)
        service = PipelineService(
            config,
            out_dir=out_dir,
            threads=args.threads,
            quadrature_tol=args.quadrature_tol,
            scenario_name=str(args.scenario),
        )
        summary = service.run(args.command)
        if args.command == "validate":
            stdout.write(json.dumps(jsonable(summary), sort_keys=True, indent=2) + "\n")
        else:
            logger.info("Wrote %s", ", ".join(service.state_manager.snapshot()["artifacts"]))
        return EXIT_OK
    except (OscDetectError, OSError) as e:
        logger.error("%s failed: %s", args.command, e)
        return exit_code_for(e)
    finally:
        pipeline_logger.uninstall()


def main(argv: Optional[List[str]] = None) -> int:
    """Entry point; never lets an exception escape without an exit code."""
    try:
        return run(argv)
    except KeyboardInterrupt:
        return 130
    except Exception as e:  # pylint: disable=broad-exception-caught
        sys.stderr.write(f"unexpected error: {e!r}\n")
        return 1
