"""
runner
======

Command layer of the simulator: configuration loading, subcommands and
result writing.
"""

from runner.commands import (
    COMMANDS,
    cmd_calibrate,
    cmd_optimize_mode,
    cmd_pn_limit,
    cmd_simulate,
    cmd_spectrum,
    cmd_sweep,
)
from runner.config_loader import ConfigError, config_from_dict, load_config
from runner.writer import ResultWriter, RunManifest

__all__ = [
    "COMMANDS",
    "ConfigError",
    "ResultWriter",
    "RunManifest",
    "cmd_calibrate",
    "cmd_optimize_mode",
    "cmd_pn_limit",
    "cmd_simulate",
    "cmd_spectrum",
    "cmd_sweep",
    "config_from_dict",
    "load_config",
]
