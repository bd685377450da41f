"""
optimize.py
===========

Choice of the detected temporal mode of the readout probe.

The readout light is projected on exp(-gamma t). A slow mode keeps more
of the atomic signal but also more of the late light that carries only
probe noise and extra decoherence; a fast mode does the opposite. The
scan evaluates the SNR on a grid of gamma and returns the best one.

Author: Dênio Barbosa Júnior
Created: 2026-10-14
"""

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np
import pandas as pd
from loguru import logger

from estimation.readout import analyze_analytic, analyze_monte_carlo
from magnetometer.config import SimConfig
from protocol.monte_carlo import derive_seed


@dataclass
class ModeOptimization:
    """
    Result of the mode scan.

    Attributes:
        gamma_opt: Best mode rate, s^-1 (smallest on ties)
        curve: DataFrame with columns mode_gamma, snr, stderr
    """

    gamma_opt: float
    curve: pd.DataFrame


def optimize_mode_gamma(
    config: SimConfig,
    gamma_grid: Optional[Sequence[float]] = None,
    path: str = "mode",
    n_shots: Optional[int] = None,
    workers: Optional[int] = None,
) -> ModeOptimization:
    """
    Scan the readout mode rate and pick the SNR maximum.

    Args:
        config: Configuration of the projection-noise-limited readout
        gamma_grid: Candidate rates, s^-1 (config.mode_gamma_grid)
        path: "mode" for the exact sliced-probe model, "time" for
            Monte Carlo through the lock-in synthesis
        n_shots: Shots per ensemble on the time path
        workers: Worker processes on the time path

    Returns:
        Best rate and the SNR curve

    Raises:
        ValueError: On an empty grid or unknown path
    """
    grid = sorted(float(g) for g in (gamma_grid if gamma_grid is not None else config.mode_gamma_grid))
    if not grid:
        raise ValueError("Mode gamma grid is empty")
    if path not in ("mode", "time"):
        raise ValueError(f"path must be 'mode' or 'time', got '{path}'")

    snrs, errors = [], []
    for i, gamma in enumerate(grid):
        probe = replace(config.probe2, mode_gamma=gamma, mode_sign="falling")
        if path == "mode":
            point = analyze_analytic(
                replace(config, probe2=probe, readout_model="temporal", readout_path="mode"), "pn"
            )
        else:
            point, _, _ = analyze_monte_carlo(
                replace(config, probe2=probe, readout_path="time"),
                "pn", n_shots, derive_seed(config.master_seed, 200 + i), workers,
            )
        snrs.append(point.snr)
        errors.append(point.snr_stderr)
        logger.debug(f"mode gamma {gamma:.1f} s^-1: SNR {point.snr:.4f}")

    values = np.array(snrs)
    best = int(np.flatnonzero(values >= values.max() * (1.0 - 1e-12))[0])
    logger.info(f"Optimal mode gamma {grid[best]:.1f} s^-1 (SNR {values[best]:.3f})")
    return ModeOptimization(
        gamma_opt=grid[best],
        curve=pd.DataFrame({"mode_gamma": grid, "snr": snrs, "stderr": errors}),
    )
