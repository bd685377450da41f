"""
config_loader.py
================

Load a ``SimConfig`` from a YAML file.

The file mirrors the dataclass layout: top-level run settings plus the
sections constants, ensemble, probe1, probe2, rf, lockin, sweep and
output. Missing keys keep the defaults of the chosen base profile
(``profile: baseline`` or ``profile: entanglement``). Quantities accept unit
suffixes ("0.92 G", "36 fT", "15 ms", "322 kHz", "0.43 ms^-1").

Example:
    >>> config = load_config("profiles/entanglement.yml")
    >>> config.protocol
    'entangled'

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

import os
import re
from dataclasses import fields, replace
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, Optional, Tuple, Union

import numpy as np
import yaml
from loguru import logger

from magnetometer.config import SimConfig, baseline_config, entanglement_config
from runner.utils import parse_quantity


class ConfigError(ValueError):
    """
    Invalid configuration file.

    Attributes:
        key: Dotted key the error refers to, when known
        line: 1-based line in the file, when known
    """

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        location = f" (line {line})" if line is not None else ""
        super().__init__(f"{message}{location}")
        self.key = key
        self.line = line


Parser = Callable[[Any], Any]


def _quantity(dimension: str) -> Parser:
    return lambda value: parse_quantity(value, dimension)


def _number(value: Any) -> float:
    return parse_quantity(value, "dimensionless")


def _integer(value: Any) -> int:
    if isinstance(value, int) and not isinstance(value, bool):
        return value
    number = _number(value)
    if number != int(number):
        raise ValueError(f"Expected an integer, got {value}")
    return int(number)


def _text(value: Any) -> str:
    if not isinstance(value, str):
        raise ValueError(f"Expected a string, got {value!r}")
    return value


def _flag(value: Any) -> bool:
    if not isinstance(value, bool):
        raise ValueError(f"Expected true or false, got {value!r}")
    return value


def _carrier(value: Any) -> Optional[float]:
    """Carrier as angular frequency; frequency units are converted."""
    if value is None:
        return None
    if isinstance(value, str) and value.strip().endswith("Hz"):
        return 2.0 * np.pi * parse_quantity(value, "frequency")
    return parse_quantity(value, "angular")


def _optional(parser: Parser) -> Parser:
    return lambda value: None if value is None else parser(value)


def _list_of(parser: Parser) -> Parser:
    def parse(value: Any) -> list:
        if not isinstance(value, list):
            raise ValueError(f"Expected a list, got {value!r}")
        return [parser(item) for item in value]

    return parse


_PROBE: Dict[str, Parser] = {
    "duration": _quantity("time"),
    "photon_number": _number,
    "detuning": _quantity("frequency"),
    "xi_squared": _number,
    "eta_detection": _number,
    "mode_gamma": _quantity("rate"),
    "mode_sign": _text,
}

SECTIONS: Dict[str, Dict[str, Parser]] = {
    "constants": {"gyromagnetic_ratio": _number, "spin": _number},
    "ensemble": {
        "n_atoms_per_cell": _number,
        "n_cells": _integer,
        "t2_dark": _quantity("time"),
        "gamma_swap": _quantity("rate"),
        "gamma_extra": _quantity("rate"),
        "beta0": _number,
        "optical_depth": _number,
    },
    "probe1": _PROBE,
    "probe2": _PROBE,
    "rf": {
        "amplitude": _quantity("field"),
        "duration": _quantity("time"),
        "phase": _number,
        "carrier": _carrier,
    },
    "lockin": {
        "sample_rate": _optional(_quantity("frequency")),
        "detection_bandwidth": _quantity("frequency"),
    },
    "sweep": {
        "variable": _text,
        "values": _list_of(_quantity("time")),
        "method": _text,
    },
    "output": {
        "out_dir": _text,
        "write_time_series": _flag,
        "copy_data_dictionary": _flag,
    },
}

TOP_LEVEL: Dict[str, Parser] = {
    "protocol": _text,
    "cell_config": _text,
    "n_shots": _integer,
    "master_seed": _integer,
    "workers": _integer,
    "pump_duration": _quantity("time"),
    "delay": _quantity("time"),
    "b_dc": _quantity("field"),
    "calibration_s3c": _number,
    "readout_path": _text,
    "readout_model": _text,
    "n_slices": _integer,
    "mode_gamma_grid": _list_of(_quantity("rate")),
}

BASE_PROFILES: Dict[str, Callable[[], SimConfig]] = {
    "baseline": baseline_config,
    "entanglement": entanglement_config,
}


def _key_lines(node: yaml.Node, prefix: str = "") -> Dict[str, int]:
    """Map dotted keys to 1-based line numbers."""
    lines: Dict[str, int] = {}
    if isinstance(node, yaml.MappingNode):
        for key_node, value_node in node.value:
            key = f"{prefix}{key_node.value}"
            lines[key] = key_node.start_mark.line + 1
            lines.update(_key_lines(value_node, f"{key}."))
    return lines


def _read_yaml(path: Path) -> Tuple[Dict[str, Any], Dict[str, int]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"Cannot read config file {path}: {e}") from e
    try:
        data = yaml.safe_load(text)
        node = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"Malformed YAML in {path}: {getattr(e, 'problem', e)}", line=line) from e
    if data is None:
        return {}, {}
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must contain a mapping at the top level", line=1)
    return data, _key_lines(node) if node is not None else {}


def config_from_dict(
    data: Dict[str, Any], lines: Optional[Dict[str, int]] = None
) -> SimConfig:
    """
    Build and validate a configuration from parsed YAML data.

    Raises:
        ConfigError: On unknown keys, bad values or failed validation
    """
    lines = lines or {}
    data = dict(data)
    profile = data.pop("profile", "baseline")
    if profile not in BASE_PROFILES:
        raise ConfigError(
            f"Unknown base profile '{profile}'. Choose from {list(BASE_PROFILES)}",
            key="profile", line=lines.get("profile"),
        )
    config = BASE_PROFILES[profile]()

    top_updates: Dict[str, Any] = {}
    for key, value in data.items():
        if key in SECTIONS:
            if value is None:
                continue
            if not isinstance(value, dict):
                raise ConfigError(f"Section '{key}' must be a mapping", key=key, line=lines.get(key))
            section = getattr(config, key)
            updates = {}
            for field_name, raw in value.items():
                dotted = f"{key}.{field_name}"
                if field_name not in SECTIONS[key]:
                    raise ConfigError(
                        f"Unknown config key '{field_name}' in section '{key}'",
                        key=dotted, line=lines.get(dotted),
                    )
                try:
                    updates[field_name] = SECTIONS[key][field_name](raw)
                except ValueError as e:
                    raise ConfigError(f"Invalid value for '{dotted}': {e}", key=dotted,
                                      line=lines.get(dotted)) from e
            top_updates[key] = replace(section, **updates)
        elif key in TOP_LEVEL:
            try:
                top_updates[key] = TOP_LEVEL[key](value)
            except ValueError as e:
                raise ConfigError(f"Invalid value for '{key}': {e}", key=key,
                                  line=lines.get(key)) from e
        else:
            raise ConfigError(f"Unknown config key '{key}'", key=key, line=lines.get(key))

    config = replace(config, **top_updates)

    env_out_dir = os.getenv("MAGSIM_OUTPUT_DIR")
    if env_out_dir and "out_dir" not in (data.get("output") or {}):
        config = replace(config, output=replace(config.output, out_dir=env_out_dir))

    _validate(config, lines)
    return config


def _named_field(message: str, names: Iterable[str]) -> Optional[str]:
    """First field name mentioned in a validation message."""
    found = []
    for name in names:
        match = re.search(rf"\b{re.escape(name)}\b", message)
        if match:
            found.append((match.start(), name))
    return min(found)[1] if found else None


def _validate(config: SimConfig, lines: Dict[str, int]) -> None:
    """Validate section by section so the error carries a dotted key and line."""
    for section in SECTIONS:
        record = getattr(config, section)
        if not hasattr(record, "validate"):
            continue
        try:
            record.validate()
        except ValueError as e:
            name = _named_field(str(e), (f.name for f in fields(record)))
            key = f"{section}.{name}" if name else section
            raise ConfigError(f"Invalid value for '{key}': {e}", key=key,
                              line=lines.get(key, lines.get(section))) from e
    try:
        config.validate()
    except ValueError as e:
        key = _named_field(str(e), TOP_LEVEL)
        raise ConfigError(f"Invalid configuration: {e}", key=key,
                          line=lines.get(key) if key else None) from e


def load_config(path: Union[str, Path]) -> SimConfig:
    """
    Load and validate a configuration file.

    Args:
        path: YAML file

    Returns:
        Validated configuration

    Raises:
        ConfigError: On unreadable or malformed files, unknown keys or
            invalid values
    """
    path = Path(path)
    data, lines = _read_yaml(path)
    config = config_from_dict(data, lines)
    logger.info(f"Loaded config {path} (protocol '{config.protocol}', hash {config.config_hash()[:12]})")
    return config


def dataclass_keys() -> Dict[str, Tuple[str, ...]]:
    """Field names per section, for documentation and tests."""
    config = SimConfig()
    return {name: tuple(f.name for f in fields(getattr(config, name))) for name in SECTIONS}
