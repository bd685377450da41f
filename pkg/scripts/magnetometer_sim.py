#!/usr/bin/env python3
"""
magnetometer_sim.py
===================

Command-line entry point of the RF atomic magnetometer simulator.

Subcommands:
    simulate       Monte Carlo run of the configured protocol
    sweep          Delay or RF-duration sweep of both protocols
    pn-limit       Projection-noise-limited sensitivity
    calibrate      kappa^2 calibration sequence
    optimize-mode  Readout temporal-mode scan
    spectrum       Power spectrum of a synthesized photocurrent

Usage:
    python scripts/magnetometer_sim.py simulate --config profiles/baseline.yml --seed 1 --shots 10000 --out results/pn
    python scripts/magnetometer_sim.py pn-limit --config profiles/baseline.yml

Exit codes: 0 success, 2 configuration error, 3 runtime error.

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

import os
import sys
import argparse
import json
from dataclasses import replace

from dotenv import load_dotenv
from loguru import logger

# Add project root to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from magnetometer.config import PROTOCOLS, SimConfig, baseline_config
from runner.commands import COMMANDS
from runner.config_loader import ConfigError, load_config
from runner.writer import to_builtin

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def parse_args(argv=None):
    """Parse command line arguments."""
    parser = argparse.ArgumentParser(
        description="Gaussian-state simulator of a two-cell RF atomic magnetometer"
    )
    parser.add_argument(
        "command",
        choices=sorted(COMMANDS),
        help="Subcommand to run",
    )
    parser.add_argument(
        "--config",
        type=str,
        default=None,
        help="YAML configuration file (defaults to the built-in baseline profile)",
    )
    parser.add_argument(
        "--seed",
        type=int,
        default=None,
        help="Master seed of the per-shot random streams",
    )
    parser.add_argument(
        "--shots",
        type=int,
        default=None,
        help="Monte Carlo shots per ensemble",
    )
    parser.add_argument(
        "--out",
        type=str,
        default=None,
        help="Output directory",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="Worker processes for Monte Carlo",
    )
    parser.add_argument(
        "--protocol",
        choices=PROTOCOLS,
        default=None,
        help="Override the configured protocol",
    )
    parser.add_argument(
        "--path",
        choices=("mode", "time"),
        default="mode",
        help="Readout model used by optimize-mode",
    )
    parser.add_argument(
        "--log-level",
        type=str,
        default=None,
        help="Console log level (default: MAGSIM_LOG_LEVEL or INFO)",
    )
    return parser.parse_args(argv)


def resolve_config(args) -> SimConfig:
    """
    Load the configuration and apply command-line overrides.

    Raises:
        ConfigError: On unreadable, malformed or invalid configuration
    """
    config = load_config(args.config) if args.config else baseline_config()
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.shots is not None:
        updates["n_shots"] = args.shots
    if args.workers is not None:
        updates["workers"] = args.workers
    if args.protocol is not None:
        updates["protocol"] = args.protocol
    if args.out is not None:
        updates["output"] = replace(config.output, out_dir=args.out)
    config = replace(config, **updates)
    try:
        config.validate()
    except ValueError as e:
        raise ConfigError(f"Invalid command-line override: {e}") from e
    return config


def run_command(command: str, config: SimConfig, path: str = "mode") -> dict:
    """Dispatch one subcommand on a resolved configuration."""
    if command == "optimize-mode":
        return COMMANDS[command](config, path=path)
    return COMMANDS[command](config)


def main(argv=None):
    """Main entry point."""
    load_dotenv()

    args = parse_args(argv)
    level = (args.log_level or os.getenv("MAGSIM_LOG_LEVEL", "INFO")).upper()

    # Configure logging
    logger.remove()
    logger.add(
        sys.stderr,
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | {message}",
        level=level,
    )
    logger.add(
        "logs/magnetometer_{time}.log",
        rotation="1 day",
        retention="7 days",
        level="DEBUG",
    )

    logger.info("=" * 60)
    logger.info(f"RF MAGNETOMETER SIMULATOR - {args.command.upper()}")
    logger.info("=" * 60)

    try:
        config = resolve_config(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG

    logger.info(f"Protocol: {config.protocol}")
    logger.info(f"Shots: {config.n_shots}, seed: {config.master_seed}, workers: {config.workers}")
    logger.info(f"Output: {config.output.out_dir}")

    try:
        summary = run_command(args.command, config, args.path)
    except Exception as e:
        logger.exception(f"{args.command} failed: {e}")
        return EXIT_RUNTIME

    if args.command == "pn-limit":
        print(json.dumps(to_builtin(
            {key: summary[key] for key in ("b_min", "sensitivity", "rf_duration")}
        ), indent=2))

    logger.info("=" * 60)
    logger.info(f"{args.command.upper()} COMPLETE")
    logger.info("=" * 60)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
