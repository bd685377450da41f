"""
readout.py
==========

Turn protocol runs into readout figures of merit.

Two routes produce the same ``ReadoutPoint``: the analytic route reads
exact conditional moments off the Gaussian state, the Monte Carlo route
runs signal and reference ensembles and estimates the same quantities
with standard errors. For the entangled protocol the readout is
corrected shot by shot with the entangling probe's outcomes.

Author: Dênio Barbosa Júnior
Created: 2026-10-14
"""

from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

import numpy as np
from loguru import logger

from estimation.figures import (
    atomic_noise_pn_units,
    epr_criterion,
    kappa_from_displacement,
    sensitivity,
    snr,
    snr_from_moments,
    to_shot_noise_units,
)
from gaussian.state import VACUUM_VARIANCE
from magnetometer.config import SimConfig
from magnetometer.physics import coupling_constant, rf_displacement
from protocol.monte_carlo import ShotEnsemble, derive_seed, monte_carlo
from protocol.sequences import readout_moments


@dataclass
class ReadoutPoint:
    """
    Figures of merit of one protocol at one parameter setting.

    Attributes:
        protocol: "pn" or "entangled"
        snr: Signal-to-noise ratio along the RF direction
        snr_stderr: Standard error of ``snr`` (0 for analytic points)
        mean_shift: Readout displacement produced by the RF pulse
        readout_variance_snu: Readout variance along the RF direction,
            shot-noise units, conditional on earlier outcomes
        atomic_noise_pn: Atomic noise in PN units averaged over S2c and S2s
        atomic_noise_stderr: Standard error of ``atomic_noise_pn``
        epr_variance: EPR variance of the plus pair inferred from the readout
        sensitivity_tau: B_RF sqrt(tau) / SNR
        sensitivity_cycle: B_RF sqrt(cycle time) / SNR
        bandwidth: 0.88 / tau
    """

    protocol: str
    snr: float
    snr_stderr: float
    mean_shift: float
    readout_variance_snu: float
    atomic_noise_pn: float
    atomic_noise_stderr: float
    epr_variance: float
    sensitivity_tau: float
    sensitivity_cycle: float
    bandwidth: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _direction(config: SimConfig) -> np.ndarray:
    return np.array([np.cos(config.rf.phase), np.sin(config.rf.phase)])


def _readout_kappa_squared(config: SimConfig) -> float:
    probe = config.probe2
    return coupling_constant(config.ensemble.gamma_swap, probe.duration, probe.xi_squared) ** 2


def _atomic_noise(config: SimConfig, variances_snu: np.ndarray) -> np.ndarray:
    probe = config.probe2
    kappa_sq = _readout_kappa_squared(config)
    return np.array([
        atomic_noise_pn_units(v, kappa_sq, probe.xi_squared, probe.eta_detection)
        for v in variances_snu
    ])


def _finish(
    config: SimConfig,
    protocol: str,
    snr_value: float,
    snr_stderr: float,
    shift: float,
    readout_var_snu: float,
    quadrature_vars_snu: np.ndarray,
    atomic_stderr: float,
) -> ReadoutPoint:
    atomic = _atomic_noise(config, quadrature_vars_snu)
    # PN units here are variance / 0.5, so the EPR variance is their mean.
    epr = epr_criterion(0.5 * atomic[1], 0.5 * atomic[0])
    tau = config.rf.duration
    b_rf = config.rf.amplitude
    positive = snr_value > 0
    return ReadoutPoint(
        protocol=protocol,
        snr=snr_value,
        snr_stderr=snr_stderr,
        mean_shift=shift,
        readout_variance_snu=readout_var_snu,
        atomic_noise_pn=float(np.mean(atomic)),
        atomic_noise_stderr=atomic_stderr,
        epr_variance=epr,
        sensitivity_tau=sensitivity(b_rf, snr_value, tau) if positive else float("inf"),
        sensitivity_cycle=(
            sensitivity(b_rf, snr_value, config.cycle_time(protocol)) if positive else float("inf")
        ),
        bandwidth=config.rf.bandwidth,
    )


def analyze_analytic(config: SimConfig, protocol: Optional[str] = None) -> ReadoutPoint:
    """
    Exact figures of merit from the Gaussian moments.

    Args:
        config: Simulation configuration
        protocol: "pn" or "entangled" (config.protocol when omitted)

    Returns:
        Readout point with zero standard errors
    """
    protocol = protocol or config.protocol
    if protocol not in ("pn", "entangled"):
        raise ValueError(f"Readout analysis supports 'pn' and 'entangled', got '{protocol}'")
    mean, cov = readout_moments(config, protocol)["probe2"]
    u = _direction(config)
    shift = float(u @ mean)
    variance = float(u @ cov @ u)
    quadrature_vars = np.array([to_shot_noise_units(cov[0, 0]), to_shot_noise_units(cov[1, 1])])
    return _finish(
        config,
        protocol,
        snr_from_moments(shift, variance),
        0.0,
        shift,
        to_shot_noise_units(variance),
        quadrature_vars,
        0.0,
    )


def corrected_readout(
    ensemble: ShotEnsemble, coefficients: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Readout outcomes corrected with the entangling probe's outcomes.

    The probe2 outcomes are regressed on the probe1 outcomes (with an
    intercept). Without ``coefficients`` the regression is fitted on this
    ensemble; pass the coefficients of a reference ensemble to correct a
    signal ensemble with the same estimator.

    Returns:
        Tuple of (corrected outcomes, shape (n, 2), coefficients, shape (3, 2))
    """
    probe2 = ensemble.outcomes("probe2")
    if "probe1" not in ensemble.pulse_ids():
        return probe2, np.zeros((3, 2))
    design = np.column_stack([np.ones(ensemble.n_shots), ensemble.outcomes("probe1")])
    if coefficients is None:
        coefficients, *_ = np.linalg.lstsq(design, probe2, rcond=None)
    prediction = design[:, 1:] @ coefficients[1:]
    return probe2 - prediction, coefficients


def readout_ensembles(
    config: SimConfig,
    protocol: Optional[str] = None,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Tuple[ShotEnsemble, ShotEnsemble]:
    """
    Signal ensemble and reference ensemble (B_RF = 0) on independent seeds.

    Raises:
        ValueError: For protocols other than "pn" and "entangled"
    """
    protocol = protocol or config.protocol
    if protocol not in ("pn", "entangled"):
        raise ValueError(f"Readout analysis supports 'pn' and 'entangled', got '{protocol}'")
    master_seed = config.master_seed if master_seed is None else master_seed
    reference_config = replace(config, rf=replace(config.rf, amplitude=0.0))

    signal_ensemble = monte_carlo(protocol, config, n_shots, derive_seed(master_seed, 1), workers)
    reference_ensemble = monte_carlo(
        protocol, reference_config, n_shots, derive_seed(master_seed, 2), workers
    )
    return signal_ensemble, reference_ensemble


def analyze_monte_carlo(
    config: SimConfig,
    protocol: Optional[str] = None,
    n_shots: Optional[int] = None,
    master_seed: Optional[int] = None,
    workers: Optional[int] = None,
) -> Tuple[ReadoutPoint, ShotEnsemble, ShotEnsemble]:
    """
    Estimated figures of merit from signal and reference ensembles.

    The reference ensemble repeats the protocol with B_RF = 0 on an
    independent seed.

    Returns:
        Tuple of (readout point, signal ensemble, reference ensemble)
    """
    protocol = protocol or config.protocol
    signal_ensemble, reference_ensemble = readout_ensembles(
        config, protocol, n_shots, master_seed, workers
    )

    reference, coefficients = corrected_readout(reference_ensemble)
    signal, _ = corrected_readout(signal_ensemble, coefficients)
    u = _direction(config)
    result = snr(signal @ u, reference @ u)

    n = reference.shape[0]
    quadrature_vars = np.array([
        to_shot_noise_units(float(np.var(reference[:, k], ddof=1))) for k in range(2)
    ])
    # mean of two quadratures, each with relative error sqrt(2 / (n - 1))
    var_stderr = float(np.mean(quadrature_vars) * np.sqrt(2.0 / (n - 1)) / np.sqrt(2.0))
    probe = config.probe2
    atomic_stderr = var_stderr / (probe.eta_detection * _readout_kappa_squared(config))

    point = _finish(
        config,
        protocol,
        result.value,
        result.stderr,
        float(np.mean(signal @ u) - np.mean(reference @ u)),
        to_shot_noise_units(float(np.var(signal @ u, ddof=1))),
        quadrature_vars,
        atomic_stderr,
    )
    logger.info(
        f"{protocol}: SNR {point.snr:.3f} +/- {point.snr_stderr:.3f}, "
        f"atomic noise {point.atomic_noise_pn:.3f} PN"
    )
    return point, signal_ensemble, reference_ensemble


def rf_calibrated_kappa(config: SimConfig, pulse_id: str = "probe2") -> Dict[str, float]:
    """
    Coupling of one probe inferred from the readout of the RF displacement.

    The RF displacement in PN units comes from the projection-noise
    calibration. Reading it out with the chosen probe and inverting the
    mean shift gives kappa for that probe's light power, and with it the
    projection-noise level in shot-noise units (eta kappa^2).

    Args:
        config: Simulation configuration
        pulse_id: "probe1" or "probe2"

    Returns:
        Dict with kappa_squared, kappa_squared_model, pn_level_snu and
        displacement_pn

    Raises:
        ValueError: For an unknown pulse or a zero RF displacement
    """
    probes = {"probe1": config.probe1, "probe2": config.probe2}
    if pulse_id not in probes:
        raise ValueError(f"Unknown pulse '{pulse_id}'. Choose from {list(probes)}")
    probe = probes[pulse_id]
    readout_config = replace(config, probe2=probe, readout_path="mode", readout_model="lumped")

    mean, _ = readout_moments(readout_config, "pn")["probe2"]
    displacement = rf_displacement(config.rf, config.ensemble, config.constants)
    displacement_pn = displacement.magnitude / np.sqrt(VACUUM_VARIANCE)
    kappa = kappa_from_displacement(float(np.hypot(*mean)), displacement_pn, probe.eta_detection)

    model = coupling_constant(config.ensemble.gamma_swap, probe.duration, probe.xi_squared) ** 2
    logger.debug(f"{pulse_id}: kappa^2 {kappa**2:.4f} from the RF readout, model {model:.4f}")
    return {
        "kappa_squared": kappa**2,
        "kappa_squared_model": model,
        "pn_level_snu": probe.eta_detection * kappa**2,
        "displacement_pn": displacement_pn,
    }
