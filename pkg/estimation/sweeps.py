"""
sweeps.py
=========

Parameter sweeps comparing the entangled and unentangled protocols.

A delay sweep traces the recovery of the conditional atomic noise after
the entangling probe and fits its lifetime. An RF-duration sweep traces
sensitivity and SNR times bandwidth against the detection bandwidth.

Author: Dênio Barbosa Júnior
Created: 2026-10-14
"""

from dataclasses import replace
from typing import List, Optional, Tuple

import pandas as pd
from loguru import logger

from estimation.fitting import LifetimeFit, fit_exponential_lifetime
from estimation.readout import ReadoutPoint, analyze_analytic, analyze_monte_carlo
from magnetometer.config import SimConfig, SweepSpec
from protocol.monte_carlo import derive_seed


SWEEP_SERIES = ("entangled", "pn")
SWEEP_COLUMNS = ["quantity", "series", "x", "value", "stderr", "bandwidth"]


def with_sweep_value(config: SimConfig, variable: str, value: float) -> SimConfig:
    """Copy of ``config`` with the swept variable set to ``value``."""
    if variable == "delay":
        return replace(config, delay=value)
    if variable == "rf.duration":
        return replace(config, rf=replace(config.rf, duration=value))
    raise ValueError(f"Invalid sweep variable '{variable}'")


def _rows(point: ReadoutPoint, series: str, x: float) -> List[dict]:
    rows = [
        ("atomic_noise", point.atomic_noise_pn, point.atomic_noise_stderr),
        ("snr", point.snr, point.snr_stderr),
        ("sensitivity", point.sensitivity_cycle,
         point.sensitivity_cycle * point.snr_stderr / point.snr if point.snr > 0 else float("nan")),
        ("snr_times_bandwidth", point.snr * point.bandwidth, point.snr_stderr * point.bandwidth),
    ]
    if series == "entangled":
        rows.append(("epr_variance", point.epr_variance, point.atomic_noise_stderr))
    return [
        {"quantity": q, "series": series, "x": x, "value": v, "stderr": e,
         "bandwidth": point.bandwidth}
        for q, v, e in rows
    ]


def run_sweep(
    config: SimConfig,
    spec: Optional[SweepSpec] = None,
    n_shots: Optional[int] = None,
    workers: Optional[int] = None,
) -> Tuple[pd.DataFrame, Optional[LifetimeFit]]:
    """
    Evaluate both protocols on every grid value.

    Args:
        config: Base configuration (entanglement profile)
        spec: Sweep definition (config.sweep when omitted)
        n_shots: Shots per ensemble for the Monte Carlo method
        workers: Worker processes for the Monte Carlo method

    Returns:
        Tuple of (long-format curves, lifetime fit of the entangled atomic
        noise for delay sweeps, else None)

    Raises:
        ValueError: On an invalid sweep variable or empty grid
    """
    spec = spec or config.sweep
    spec.validate()
    if config.cell_config != "two":
        raise ValueError("Sweeps compare entangled and unentangled readout and need two cells")

    rows: List[dict] = []
    entangled_noise: List[Tuple[float, float, float]] = []
    for i, value in enumerate(spec.values):
        point_config = with_sweep_value(config, spec.variable, value)
        for j, series in enumerate(SWEEP_SERIES):
            if spec.method == "analytic":
                point = analyze_analytic(point_config, series)
            else:
                point, _, _ = analyze_monte_carlo(
                    point_config, series, n_shots,
                    derive_seed(config.master_seed, 100 + i, j), workers,
                )
            rows.extend(_rows(point, series, value))
            if series == "entangled":
                entangled_noise.append((value, point.atomic_noise_pn, point.atomic_noise_stderr))
        logger.info(f"Sweep {spec.variable} = {value:.4g}: done ({i + 1}/{len(spec.values)})")

    frame = pd.DataFrame(rows, columns=SWEEP_COLUMNS)

    fit = None
    if spec.variable == "delay" and len({x for x, _, _ in entangled_noise}) >= 3:
        delays = [x for x, _, _ in entangled_noise]
        noise = [v for _, v, _ in entangled_noise]
        errors = [e for _, _, e in entangled_noise]
        weights = [1.0 / e**2 for e in errors] if all(e > 0 for e in errors) else None
        try:
            fit = fit_exponential_lifetime(delays, noise, weights)
        except (ValueError, RuntimeError) as e:
            logger.warning(f"Skipping lifetime fit: {e}")
    return frame, fit
