"""
figures.py
==========

Figures of merit computed from readout ensembles.

Signal-to-noise ratio, magnetic sensitivity, the EPR variance, the noise
budget of a readout and the conversion of Stokes outcomes back to spin
displacements. Variances are in normalized units (vacuum 0.5) unless a
name says shot-noise units (vacuum 1) or PN units (coherent spin state 1).

Author: Dênio Barbosa Júnior
Created: 2026-10-14
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger

from gaussian.state import VACUUM_VARIANCE
from protocol.monte_carlo import ShotEnsemble


@dataclass
class SNRResult:
    """
    Signal-to-noise ratio of a displaced ensemble against a reference.

    Attributes:
        value: |mean_signal - mean_reference| / std_signal
        stderr: Approximate standard error of ``value``
        pooled_value: Same shift over the pooled standard deviation
    """

    value: float
    stderr: float
    pooled_value: float


@dataclass
class NoiseBudget:
    """
    Decomposition of a readout variance.

    Attributes:
        total_shot_units: Measured variance, shot-noise units
        light_contribution: Light noise in shot-noise units (0.5 under the
            simplified convention)
        atomic_pn_units: Atomic noise in PN units under the simplified
            convention total = light + kappa^2 * atomic
        kappa_squared_used: Coupling used for the conversion
        atomic_pn_units_exact: Atomic noise from the full transmission
            model including t^2 and detection loss, when xi^2 is known
    """

    total_shot_units: float
    light_contribution: float
    atomic_pn_units: float
    kappa_squared_used: float
    atomic_pn_units_exact: Optional[float] = None


@dataclass
class DisplacementCalibration:
    """
    Spin displacement inferred from mean Stokes outcomes.

    Attributes:
        j_z: Displacement of J_z, units of hbar
        j_y: Displacement of J_y, units of hbar
        pn_z: J_z displacement in projection-noise standard deviations
        pn_y: J_y displacement in projection-noise standard deviations
    """

    j_z: float
    j_y: float
    pn_z: float
    pn_y: float


@dataclass
class SensitivityReport:
    """
    Sensitivity of a readout expressed several ways.

    Attributes:
        snr: Signal-to-noise ratio
        b_min: Field giving SNR 1, tesla
        sensitivity_tau: b_min * sqrt(tau), T/sqrt(Hz)
        sensitivity_cycle: b_min * sqrt(cycle_time), T/sqrt(Hz)
        bandwidth: 0.88 / tau, Hz
    """

    snr: float
    b_min: float
    sensitivity_tau: float
    sensitivity_cycle: float
    bandwidth: float


def snr(signal: np.ndarray, reference: np.ndarray) -> SNRResult:
    """
    Signal-to-noise ratio of one readout quadrature.

    Args:
        signal: Outcomes with the RF pulse applied
        reference: Outcomes without the RF pulse

    Returns:
        SNR with its standard error

    Raises:
        ValueError: On fewer than two shots or zero signal variance

    Example:
        >>> round(snr(np.array([1.0, 3.0]), np.array([-1.0, 1.0])).value, 3)
        1.414
    """
    signal = np.asarray(signal, dtype=float).reshape(-1)
    reference = np.asarray(reference, dtype=float).reshape(-1)
    if len(signal) < 2 or len(reference) < 2:
        raise ValueError("SNR needs at least two shots in each ensemble")
    std_signal = float(np.std(signal, ddof=1))
    std_reference = float(np.std(reference, ddof=1))
    if std_signal == 0.0:
        raise ValueError("Signal ensemble has zero variance")

    shift = abs(float(np.mean(signal) - np.mean(reference)))
    value = shift / std_signal
    n_s, n_r = len(signal), len(reference)
    stderr = float(np.sqrt(
        1.0 / n_s + (std_reference / std_signal) ** 2 / n_r + value**2 / (2.0 * (n_s - 1))
    ))
    pooled_std = float(np.sqrt(
        ((n_s - 1) * std_signal**2 + (n_r - 1) * std_reference**2) / (n_s + n_r - 2)
    ))
    return SNRResult(value=value, stderr=stderr, pooled_value=shift / pooled_std)


def snr_from_moments(mean_shift: float, variance: float) -> float:
    """Exact SNR of a Gaussian readout with known shift and variance."""
    if variance <= 0:
        raise ValueError(f"Readout variance must be positive, got {variance}")
    return abs(mean_shift) / float(np.sqrt(variance))


def sensitivity(b_rf: float, snr_value: float, time: float) -> float:
    """
    Magnetic sensitivity B_RF sqrt(time) / SNR in T/sqrt(Hz).

    Raises:
        ValueError: If snr_value is not positive
    """
    if snr_value <= 0:
        raise ValueError(f"SNR must be positive, got {snr_value}")
    if time <= 0:
        raise ValueError(f"Integration time must be positive, got {time}")
    return float(b_rf * np.sqrt(time) / snr_value)


def sensitivity_report(
    b_rf: float, snr_value: float, tau: float, cycle_time: float
) -> SensitivityReport:
    """
    Sensitivity referenced to the RF duration and to the full cycle.

    Raises:
        ValueError: If the cycle is shorter than the RF pulse
    """
    if cycle_time < tau:
        raise ValueError(f"Cycle time {cycle_time} s is shorter than the RF pulse {tau} s")
    return SensitivityReport(
        snr=snr_value,
        b_min=b_rf / snr_value if snr_value > 0 else float("inf"),
        sensitivity_tau=sensitivity(b_rf, snr_value, tau),
        sensitivity_cycle=sensitivity(b_rf, snr_value, cycle_time),
        bandwidth=0.88 / tau,
    )


def to_shot_noise_units(variance: float) -> float:
    """Normalized variance to shot-noise units (vacuum 1)."""
    return variance / VACUUM_VARIANCE


def epr_criterion(
    var_y_plus: float, var_z_plus: float, pn_unit: float = VACUUM_VARIANCE
) -> float:
    """
    EPR variance (Var(y_plus) + Var(z_plus)) / (2 pn_unit).

    1 for a coherent spin state, below 1 for an entangled pair.
    """
    if pn_unit <= 0:
        raise ValueError(f"PN unit must be positive, got {pn_unit}")
    return (var_y_plus + var_z_plus) / (2.0 * pn_unit)


def atomic_noise_pn_units(
    total_shot_units: float, kappa_squared: float, xi_squared: float, eta: float = 1.0
) -> float:
    """
    Atomic noise from a readout variance using the full transmission model.

    The detected variance in shot-noise units is
    (1 - eta) + eta (t^2 + kappa^2 a) with t^2 = 1 - xi^2 kappa^2 and a the
    atomic noise in PN units.

    Raises:
        ValueError: If kappa^2 or eta is not positive
    """
    if kappa_squared <= 0 or eta <= 0:
        raise ValueError("kappa^2 and eta must be positive")
    t_squared = max(0.0, 1.0 - xi_squared * kappa_squared)
    return (total_shot_units - (1.0 - eta) - eta * t_squared) / (eta * kappa_squared)


def noise_budget(
    measured_variance_shot_units: float,
    kappa_squared_calibrated: float,
    light_noise: float = 0.5,
    stderr: float = 0.0,
    xi_squared: Optional[float] = None,
    eta: float = 1.0,
) -> NoiseBudget:
    """
    Split a readout variance into light and atomic noise.

    Simplified convention: total = light_noise + kappa^2 * atomic, with
    the atomic part in PN units clipped at zero. When ``xi_squared`` is
    given the exact decomposition is reported too.

    Args:
        measured_variance_shot_units: Readout variance, shot-noise units
        kappa_squared_calibrated: Coupling from the calibration protocol
        light_noise: Light contribution, shot-noise units
        stderr: Standard error of the measured variance
        xi_squared: Polarizability factor for the exact decomposition
        eta: Detection efficiency for the exact decomposition

    Raises:
        ValueError: If kappa^2 is not positive or the total is below the
            light noise by more than three standard errors
    """
    if kappa_squared_calibrated <= 0:
        raise ValueError(f"kappa^2 must be positive, got {kappa_squared_calibrated}")
    total = measured_variance_shot_units
    if total < light_noise - 3.0 * stderr:
        raise ValueError(
            f"Measured variance {total:.4f} is below the light noise {light_noise:.4f}"
        )
    atomic = max(0.0, (total - light_noise) / kappa_squared_calibrated)
    exact = None
    if xi_squared is not None:
        exact = atomic_noise_pn_units(total, kappa_squared_calibrated, xi_squared, eta)
    logger.debug(f"Noise budget: total {total:.4f} SNU, atomic {atomic:.4f} PN")
    return NoiseBudget(
        total_shot_units=total,
        light_contribution=light_noise,
        atomic_pn_units=atomic,
        kappa_squared_used=kappa_squared_calibrated,
        atomic_pn_units_exact=exact,
    )


def displacement_calibration(
    mean_s2c: float,
    mean_s2s: float,
    kappa: float,
    eta: float,
    photon_number: float,
    spin: float,
    n_total: float,
) -> DisplacementCalibration:
    """
    Convert mean Stokes outcomes in photon units to a spin displacement.

    <S2c> = kappa sqrt(eta) sqrt(photon_number / (F N_total)) J_z and the
    same for S2s and J_y. One projection-noise standard deviation is
    sqrt(F N_total / 2).

    Raises:
        ValueError: If kappa * sqrt(eta) is zero
    """
    if kappa * np.sqrt(eta) == 0:
        raise ValueError("Cannot calibrate displacement with zero coupling or efficiency")
    if photon_number <= 0 or n_total <= 0 or spin <= 0:
        raise ValueError("photon_number, spin and n_total must be positive")
    scale = kappa * np.sqrt(eta) * np.sqrt(photon_number / (spin * n_total))
    j_z = float(mean_s2c / scale)
    j_y = float(mean_s2s / scale)
    pn_std = float(np.sqrt(spin * n_total / 2.0))
    return DisplacementCalibration(j_z=j_z, j_y=j_y, pn_z=j_z / pn_std, pn_y=j_y / pn_std)


def kappa_from_displacement(
    mean_shift: float, displacement_pn: float, eta: float = 1.0
) -> float:
    """
    Coupling constant of a probe from the readout shift of a known displacement.

    A spin displaced by ``displacement_pn`` projection-noise standard
    deviations (sqrt(0.5) each in normalized units) shifts the detected
    Stokes mean by sqrt(eta) kappa times the displacement. Decay of the
    displacement during the probe is not corrected for.

    Args:
        mean_shift: Readout mean shift, normalized units
        displacement_pn: Displacement in PN standard deviations
        eta: Detection efficiency

    Returns:
        kappa (not squared)

    Raises:
        ValueError: If the displacement is zero or eta is not in (0, 1]
    """
    if displacement_pn == 0:
        raise ValueError("Cannot infer kappa from a zero displacement")
    if not 0.0 < eta <= 1.0:
        raise ValueError(f"eta must be in (0, 1], got {eta}")
    displacement = abs(displacement_pn) * np.sqrt(VACUUM_VARIANCE)
    return float(abs(mean_shift) / (np.sqrt(eta) * displacement))


def conditional_residuals(
    ensemble: ShotEnsemble,
    target: str = "probe2",
    regressors: Sequence[str] = ("probe1",),
) -> np.ndarray:
    """
    Residuals of one pulse's outcomes after a least-squares fit on others.

    Both quadratures of ``target`` are regressed on both quadratures of
    every regressor pulse, with an intercept. This is the shot-by-shot
    counterpart of conditioning the readout on earlier outcomes.

    Args:
        ensemble: Shot ensemble holding all named pulses
        target: Pulse whose outcomes are corrected
        regressors: Pulses whose outcomes predict the target

    Returns:
        Residuals, shape (n_shots, 2)

    Raises:
        ValueError: For unknown pulses or fewer shots than fit parameters
    """
    y = ensemble.outcomes(target)
    columns = [np.ones(ensemble.n_shots)] + [ensemble.outcomes(p) for p in regressors]
    design = np.column_stack(columns)
    if design.shape[0] <= design.shape[1]:
        raise ValueError(
            f"Need more than {design.shape[1]} shots to regress '{target}' on {list(regressors)}"
        )
    coefficients, *_ = np.linalg.lstsq(design, y, rcond=None)
    return y - design @ coefficients
