"""
writer.py
=========

Result writing for simulator runs.

This module provides a writer that places CSV tables, JSON summaries,
the run manifest and a copy of the output schema into one output
directory. Writes are retried on transient filesystem errors.

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

import json
import math
import shutil
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, List, Optional, Sequence, Union

import numpy as np
import pandas as pd
from loguru import logger

from magnetometer import __version__
from runner.utils import validate_dataframe, with_retry


DATA_DICTIONARY = Path(__file__).resolve().parents[1] / "docs" / "data_dictionary.md"


@dataclass
class RunManifest:
    """
    Provenance of one command invocation.

    Attributes:
        command: Subcommand name
        version: Simulator version
        config_hash: SHA-256 of the configuration
        master_seed: Seed of the random streams
        n_shots: Shots per ensemble
        workers: Worker processes
        started_at: UTC start time, ISO 8601
        finished_at: UTC end time, ISO 8601
        files: Files written, relative to the output directory
    """

    command: str
    config_hash: str
    master_seed: int
    n_shots: int
    workers: int
    version: str = __version__
    started_at: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: Optional[str] = None
    files: List[str] = field(default_factory=list)


def to_builtin(value: Any) -> Any:
    """Recursively convert numpy types and non-finite floats for JSON."""
    if isinstance(value, dict):
        return {str(k): to_builtin(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_builtin(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_builtin(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class ResultWriter:
    """
    Writes the artifacts of a run into one directory.

    Attributes:
        out_dir: Output directory, created on first use
        files: Names of the files written so far

    Example:
        >>> writer = ResultWriter("results")
        >>> writer.write_json({"snr": 12.3}, "summary.json")
    """

    def __init__(self, out_dir: Union[str, Path]):
        self.out_dir = Path(out_dir)
        self.files: List[str] = []
        try:
            self.out_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Cannot create output directory {self.out_dir}: {e}")
            raise

    def _record(self, name: str) -> Path:
        if name not in self.files:
            self.files.append(name)
        return self.out_dir / name

    @with_retry()
    def write_frame(
        self, df: pd.DataFrame, name: str, required_columns: Sequence[str] = ()
    ) -> Path:
        """
        Write a DataFrame as CSV without the index.

        Raises:
            ValueError: If required columns are missing or the frame is empty
        """
        if required_columns:
            validate_dataframe(df, list(required_columns))
        path = self._record(name)
        df.to_csv(path, index=False, float_format="%.12g")
        logger.info(f"Wrote {len(df)} rows to {path}")
        return path

    @with_retry()
    def write_json(self, payload: Any, name: str) -> Path:
        """Write a JSON document with sorted keys."""
        path = self._record(name)
        path.write_text(
            json.dumps(to_builtin(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        logger.info(f"Wrote {path}")
        return path

    @with_retry()
    def copy_data_dictionary(self) -> Optional[Path]:
        """Copy the output schema next to the results."""
        if not DATA_DICTIONARY.exists():
            logger.warning(f"Data dictionary not found at {DATA_DICTIONARY}")
            return None
        path = self._record(DATA_DICTIONARY.name)
        shutil.copyfile(DATA_DICTIONARY, path)
        return path

    def write_manifest(self, manifest: RunManifest) -> Path:
        """Finalize and write ``manifest.json`` listing every file written."""
        manifest.finished_at = datetime.now(timezone.utc).isoformat()
        manifest.files = sorted(set(self.files) | {"manifest.json"})
        return self.write_json(asdict(manifest), "manifest.json")
