"""
commands.py
===========

Subcommands of the magnetometer simulator.

Each command takes a validated ``SimConfig``, runs one stage of the
simulator and writes its artifacts through a single ``ResultWriter``:
CSV tables, a JSON summary, the run manifest and a copy of the data
dictionary. Every command returns its summary as a dict.

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

import time
from dataclasses import asdict, replace
from typing import Any, Dict, Optional

import numpy as np
import pandas as pd
from loguru import logger

from estimation.figures import noise_budget, sensitivity_report
from estimation.optimize import optimize_mode_gamma
from estimation.readout import (
    ReadoutPoint,
    analyze_analytic,
    analyze_monte_carlo,
    readout_ensembles,
    rf_calibrated_kappa,
)
from estimation.sweeps import SWEEP_COLUMNS, run_sweep
from gaussian.state import marginal
from lockin.dsp import TimeSeries, peak_to_floor, power_spectrum, synthesize_photocurrent
from magnetometer import __version__
from magnetometer.channels import readout_pair
from magnetometer.config import SimConfig
from magnetometer.physics import coupling_constant, pn_limited_sensitivity
from protocol.monte_carlo import derive_seed, run_calibration_protocol, shot_rng
from protocol.sequences import SequenceStep, execute_sequence
from runner.utils import format_duration
from runner.writer import ResultWriter, RunManifest


UNITS = {
    "s2c": "normalized Stokes quadrature, vacuum variance 0.5",
    "s2s": "normalized Stokes quadrature, vacuum variance 0.5",
    "variance_snu": "shot-noise units, vacuum variance 1",
    "atomic_noise_pn": "projection-noise units, coherent spin state 1",
    "epr_variance": "dimensionless, below 1 certifies entanglement",
    "b_rf": "T",
    "b_min": "T",
    "sensitivity": "T/sqrt(Hz)",
    "bandwidth": "Hz",
    "time": "s",
    "mode_gamma": "s^-1",
    "frequency": "Hz",
}

SHOT_COLUMNS = ["shot_id", "pulse_id", "s2c", "s2s"]


def _resolve(
    config: SimConfig,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> SimConfig:
    """Apply command-line overrides so the config hash covers them."""
    updates: Dict[str, Any] = {}
    if n_shots is not None:
        updates["n_shots"] = n_shots
    if master_seed is not None:
        updates["master_seed"] = master_seed
    if workers is not None:
        updates["workers"] = workers
    if out_dir is not None:
        updates["output"] = replace(config.output, out_dir=out_dir)
    config = replace(config, **updates)
    config.validate()
    return config


def _finish(writer: ResultWriter, config: SimConfig, command: str, started: float) -> None:
    if config.output.copy_data_dictionary:
        writer.copy_data_dictionary()
    manifest = RunManifest(
        command=command,
        config_hash=config.config_hash(),
        master_seed=config.master_seed,
        n_shots=config.n_shots,
        workers=config.workers,
    )
    writer.write_manifest(manifest)
    logger.info(f"{command} finished in {format_duration(time.time() - started)}")


def _header(config: SimConfig, command: str) -> Dict[str, Any]:
    return {
        "command": command,
        "version": __version__,
        "config_hash": config.config_hash(),
        "master_seed": config.master_seed,
        "n_shots": config.n_shots,
        "protocol": config.protocol,
        "units": UNITS,
    }


def _pn_limit(config: SimConfig) -> Dict[str, float]:
    limit = pn_limited_sensitivity(config.ensemble, config.rf.duration, config.constants)
    return {"b_min": limit.b_min, "sensitivity": limit.sensitivity, "rf_duration": config.rf.duration}


def _readout_kappa_squared(config: SimConfig) -> float:
    probe = config.probe2
    return coupling_constant(config.ensemble.gamma_swap, probe.duration, probe.xi_squared) ** 2


def readout_photocurrent(config: SimConfig, rng: np.random.Generator) -> TimeSeries:
    """
    Photocurrent of one readout pulse after pump and RF.

    The atomic state entering the readout is the exact Gaussian state of
    the pump and RF stages.
    """
    steps = [
        SequenceStep("pump", duration=config.pump_duration),
        SequenceStep("rf", duration=config.rf.duration),
    ]
    _, state = execute_sequence(steps, config, None, 0, "spectrum")
    atoms = marginal(state, list(readout_pair(config.cell_config)))
    probe = config.probe2
    return synthesize_photocurrent(
        atomic_mean=atoms.mean,
        atomic_cov=atoms.cov,
        omega=config.carrier_frequency(),
        photon_rate=probe.photon_rate,
        duration=probe.duration,
        sample_rate=config.sample_rate(),
        rng=rng,
        gamma_swap=config.ensemble.gamma_swap,
        xi_squared=probe.xi_squared,
        gamma_extra=config.ensemble.gamma_extra,
        noise_floor=config.ensemble.initial_variance,
        eta=probe.eta_detection,
        detection_bandwidth=config.lockin.detection_bandwidth,
    )


def cmd_simulate(
    config: SimConfig,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Run the configured protocol and write shots and summary.

    For "pn" and "entangled" a signal ensemble (RF on) and a reference
    ensemble (RF off) are written to ``shots.csv`` and
    ``shots_reference.csv``. The calibration protocol is delegated to
    :func:`cmd_calibrate`.

    Returns:
        The summary written to ``summary.json``
    """
    config = _resolve(config, n_shots, master_seed, workers, out_dir)
    if config.protocol == "calibration":
        return cmd_calibrate(config)

    started = time.time()
    logger.info(f"Simulating '{config.protocol}' with {config.n_shots} shots")
    writer = ResultWriter(config.output.out_dir)

    n = config.n_shots
    point: Optional[ReadoutPoint] = None
    if n > 1:
        point, signal, reference = analyze_monte_carlo(config, config.protocol)
    else:
        logger.warning("A single shot has no variance: skipping SNR, noise budget and sensitivity")
        signal, reference = readout_ensembles(config, config.protocol)
    writer.write_frame(signal.to_frame(), "shots.csv", SHOT_COLUMNS)
    writer.write_frame(reference.to_frame(), "shots_reference.csv", SHOT_COLUMNS)

    budget: Optional[Dict[str, Any]] = None
    if point is not None:
        variance_stderr = point.readout_variance_snu * np.sqrt(2.0 / (n - 1))
        try:
            budget = asdict(noise_budget(
                point.readout_variance_snu,
                _readout_kappa_squared(config),
                stderr=variance_stderr,
                xi_squared=config.probe2.xi_squared,
                eta=config.probe2.eta_detection,
            ))
        except ValueError as e:
            logger.warning(f"No noise budget for this run: {e}")

    report = None
    if point is not None and point.snr > 0:
        report = asdict(sensitivity_report(
            config.rf.amplitude, point.snr, config.rf.duration, config.cycle_time()
        ))

    summary = _header(config, "simulate")
    summary.update({
        "signal": signal.summary(),
        "reference": reference.summary(),
        "readout": point.to_dict() if point is not None else None,
        "analytic": analyze_analytic(config, config.protocol).to_dict(),
        "noise_budget": budget,
        "sensitivity": report,
        "pn_limit": _pn_limit(config),
        "b_rf": config.rf.amplitude,
    })
    if config.protocol == "entangled":
        summary["epr_variance"] = point.epr_variance if point is not None else None
        summary["atomic_noise_pn"] = point.atomic_noise_pn if point is not None else None

    if config.output.write_time_series:
        series = readout_photocurrent(config, shot_rng(derive_seed(config.master_seed, 3), 0))
        writer.write_frame(series.to_frame(), "timeseries.csv", ["t_or_f", "value"])

    writer.write_json(summary, "summary.json")
    _finish(writer, config, "simulate", started)
    return summary


def cmd_calibrate(
    config: SimConfig,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Estimate kappa^2 with the calibration sequence.

    The estimate is then used to split the analytic projection-noise
    readout variance into light and atomic noise.

    Returns:
        The summary written to ``calibration.json``
    """
    config = _resolve(config, n_shots, master_seed, workers, out_dir)
    started = time.time()
    writer = ResultWriter(config.output.out_dir)

    result = run_calibration_protocol(config)
    if result.ensemble is not None:
        writer.write_frame(result.ensemble.to_frame(), "calibration_shots.csv", SHOT_COLUMNS)

    pn_point = analyze_analytic(config, "pn")
    try:
        budget: Optional[Dict[str, Any]] = asdict(noise_budget(
            pn_point.readout_variance_snu,
            result.kappa_squared,
            xi_squared=config.probe2.xi_squared,
            eta=config.probe2.eta_detection,
        ))
    except ValueError as e:
        logger.warning(f"No noise budget from this calibration: {e}")
        budget = None

    rf_kappa: Dict[str, Any] = {}
    for pulse_id in ("probe1", "probe2"):
        try:
            rf_kappa[pulse_id] = rf_calibrated_kappa(config, pulse_id)
        except ValueError as e:
            logger.warning(f"No RF-referenced kappa for {pulse_id}: {e}")
            rf_kappa[pulse_id] = None

    summary = _header(config, "calibrate")
    summary.update({
        "kappa_squared": result.kappa_squared,
        "kappa_squared_stderr": result.stderr,
        "kappa_squared_model": _readout_kappa_squared(config),
        "kappa_squared_effective": config.probe2.eta_detection * result.kappa_squared,
        "calibration_s3c": config.calibration_s3c,
        "shots": result.ensemble.summary() if result.ensemble is not None else None,
        "pn_readout_variance_snu": pn_point.readout_variance_snu,
        "noise_budget": budget,
        "rf_kappa": rf_kappa,
    })
    writer.write_json(summary, "calibration.json")
    _finish(writer, config, "calibrate", started)
    return summary


def cmd_sweep(
    config: SimConfig,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Sweep delay or RF duration for both protocols.

    Writes ``sweep.csv`` (quantity, series, x, value, stderr, bandwidth)
    and ``sweep_summary.json`` with the lifetime fit of a delay sweep and
    the entangled over unentangled SNR times bandwidth ratio of an RF
    duration sweep.
    """
    config = _resolve(config, n_shots, master_seed, workers, out_dir)
    started = time.time()
    writer = ResultWriter(config.output.out_dir)

    frame, fit = run_sweep(config)
    writer.write_frame(frame, "sweep.csv", SWEEP_COLUMNS)

    summary = _header(config, "sweep")
    summary["sweep"] = asdict(config.sweep)
    if fit is not None:
        summary["lifetime_fit"] = {
            "lifetime": fit.lifetime,
            "lifetime_stderr": fit.lifetime_stderr,
            "floor": fit.floor,
            "amplitude": fit.amplitude,
            "residual_norm": fit.residual_norm,
            "lifetime_bandwidth": 1.0 / (np.pi * fit.lifetime),
        }
    if config.sweep.variable == "rf.duration":
        product = frame[frame["quantity"] == "snr_times_bandwidth"]
        table = product.pivot(index="x", columns="series", values="value")
        ratio = table["entangled"] / table["pn"]
        summary["improvement_factor"] = {
            "x": ratio.index.tolist(),
            "ratio": ratio.tolist(),
            "relative_spread": float((ratio.max() - ratio.min()) / ratio.mean()),
        }

    writer.write_json(summary, "sweep_summary.json")
    _finish(writer, config, "sweep", started)
    return summary


def cmd_pn_limit(config: SimConfig, out_dir: Optional[str] = None) -> Dict[str, Any]:
    """
    Projection-noise-limited B_min and sensitivity of the configuration.

    Returns:
        Dict with b_min (T), sensitivity (T/sqrt(Hz)) and rf_duration (s)
    """
    config = _resolve(config, out_dir=out_dir)
    started = time.time()
    writer = ResultWriter(config.output.out_dir)
    summary = _header(config, "pn-limit")
    summary.update(_pn_limit(config))
    summary["n_total"] = config.ensemble.n_total
    logger.info(
        f"B_min = {summary['b_min']:.4g} T, sensitivity = {summary['sensitivity']:.4g} T/sqrt(Hz)"
    )
    writer.write_json(summary, "pn_limit.json")
    _finish(writer, config, "pn-limit", started)
    return summary


def cmd_optimize_mode(
    config: SimConfig,
    path: str = "mode",
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Scan the readout mode rate and write ``mode_scan.csv``.

    Args:
        path: "mode" for the sliced Gaussian model, "time" for lock-in
            demodulated Monte Carlo
    """
    config = _resolve(config, n_shots, master_seed, workers, out_dir)
    started = time.time()
    writer = ResultWriter(config.output.out_dir)

    result = optimize_mode_gamma(config, path=path)
    writer.write_frame(result.curve, "mode_scan.csv", ["mode_gamma", "snr", "stderr"])

    summary = _header(config, "optimize-mode")
    summary.update({
        "path": path,
        "gamma_opt": result.gamma_opt,
        "gamma_total": config.ensemble.gamma_total,
        "gamma_opt_over_gamma_total": result.gamma_opt / config.ensemble.gamma_total,
        "snr_max": float(result.curve["snr"].max()),
    })
    writer.write_json(summary, "mode_optimization.json")
    _finish(writer, config, "optimize-mode", started)
    return summary


def cmd_spectrum(
    config: SimConfig,
    master_seed: Optional[int] = None,
    out_dir: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Power spectrum of one synthesized readout photocurrent.

    Writes ``spectrum.csv`` (t_or_f, value) and ``spectrum.json`` with
    the carrier frequency and the peak-to-floor ratio around it.

    Raises:
        ValueError: If the sample rate violates Nyquist
    """
    config = _resolve(config, master_seed=master_seed, out_dir=out_dir)
    started = time.time()
    writer = ResultWriter(config.output.out_dir)

    series = readout_photocurrent(config, shot_rng(config.master_seed, 0))
    spectrum = power_spectrum(series)
    carrier_hz = config.carrier_frequency() / (2.0 * np.pi)
    resolution = 1.0 / series.duration
    ratio = peak_to_floor(spectrum, carrier_hz, 2.0 * resolution)
    peak = spectrum.loc[spectrum["power"].idxmax(), "frequency"]

    frame = pd.DataFrame({"t_or_f": spectrum["frequency"], "value": spectrum["power"]})
    writer.write_frame(frame, "spectrum.csv", ["t_or_f", "value"])
    if config.output.write_time_series:
        writer.write_frame(series.to_frame(), "timeseries.csv", ["t_or_f", "value"])

    summary = _header(config, "spectrum")
    summary.update({
        "carrier_frequency": carrier_hz,
        "peak_frequency": float(peak),
        "peak_to_floor": ratio,
        "sample_rate": series.sample_rate,
        "n_samples": len(series.samples),
        "frequency_resolution": resolution,
    })
    writer.write_json(summary, "spectrum.json")
    _finish(writer, config, "spectrum", started)
    return summary


COMMANDS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "pn-limit": cmd_pn_limit,
    "calibrate": cmd_calibrate,
    "optimize-mode": cmd_optimize_mode,
    "spectrum": cmd_spectrum,
}
