"""
physics.py
==========

Closed-form physics of the RF magnetometer.

Larmor frequency, polarizability factor, light-atom coupling constant,
the projection-noise-limited field and the RF-induced spin displacement.
Normalized quadratures are J / sqrt(F * N_total), so a coherent spin state
has variance 0.5.

Author: Dênio Barbosa Júnior
Created: 2026-10-12
"""

from typing import NamedTuple, Optional

import numpy as np
from loguru import logger

from magnetometer.config import EnsembleParams, PhysicalConstants, RFPulse


class PNLimit(NamedTuple):
    """Projection-noise-limited field and sensitivity for one RF duration."""

    b_min: float
    sensitivity: float


class Displacement(NamedTuple):
    """RF-induced displacement of the rotating-frame spin, normalized units."""

    y: float
    z: float

    @property
    def magnitude(self) -> float:
        return float(np.hypot(self.y, self.z))


def larmor_frequency(b_dc: float, constants: Optional[PhysicalConstants] = None) -> float:
    """
    Larmor angular frequency Omega = Gamma * B_DC in rad/s.

    Raises:
        ValueError: If the field is negative
    """
    if b_dc < 0:
        raise ValueError(f"Bias field must be non-negative, got {b_dc}")
    constants = constants or PhysicalConstants()
    return constants.gyromagnetic_ratio * b_dc


def xi_squared(a2_over_a1: float) -> float:
    """Polarizability factor xi^2 = 14 a2/a1 for F = 4."""
    if a2_over_a1 < 0:
        raise ValueError(f"Polarizability ratio must be non-negative, got {a2_over_a1}")
    return 14.0 * a2_over_a1


def transmissivity(gamma_swap: float, duration: float) -> float:
    """Amplitude t = exp(-gamma_swap * T) left to the input light and atoms."""
    if gamma_swap < 0 or duration < 0:
        raise ValueError("gamma_swap and duration must be non-negative")
    return float(np.exp(-gamma_swap * duration))


def coupling_constant(gamma_swap: float, duration: float, xi_sq: float) -> float:
    """
    Light-atom coupling kappa with kappa^2 = (1 - exp(-2 gamma_swap T)) / xi^2.

    Args:
        gamma_swap: Swap rate, s^-1
        duration: Probe duration, seconds
        xi_sq: Polarizability factor, > 0

    Returns:
        kappa, so that xi^2 kappa^2 + exp(-2 gamma_swap T) = 1

    Raises:
        ValueError: On negative rate or duration, or non-positive xi^2

    Example:
        >>> round(coupling_constant(112.9, 3e-3, 1 / 6.3) ** 2, 2)
        3.1
    """
    if xi_sq <= 0:
        raise ValueError(f"xi_squared must be positive, got {xi_sq}")
    if gamma_swap < 0 or duration < 0:
        raise ValueError("gamma_swap and duration must be non-negative")
    return float(np.sqrt(-np.expm1(-2.0 * gamma_swap * duration) / xi_sq))


def pn_limited_sensitivity(
    ensemble: EnsembleParams,
    rf_duration: float,
    constants: Optional[PhysicalConstants] = None,
) -> PNLimit:
    """
    Smallest field giving SNR 1 in a projection-noise-limited readout.

    B_min = 1 / (Gamma sqrt(F N_total / 2) T2 (1 - exp(-tau/T2))), and the
    sensitivity is B_min * sqrt(tau).

    Raises:
        ValueError: If T2 or tau is not positive
    """
    constants = constants or PhysicalConstants()
    if ensemble.t2_dark <= 0:
        raise ValueError(f"T2 must be positive, got {ensemble.t2_dark}")
    if rf_duration <= 0:
        raise ValueError(f"RF duration must be positive, got {rf_duration}")

    growth = ensemble.t2_dark * -np.expm1(-rf_duration / ensemble.t2_dark)
    b_min = 1.0 / (
        constants.gyromagnetic_ratio
        * np.sqrt(constants.spin * ensemble.n_total / 2.0)
        * growth
    )
    return PNLimit(b_min=float(b_min), sensitivity=float(b_min * np.sqrt(rf_duration)))


def rf_response(
    rf: RFPulse, ensemble: EnsembleParams, constants: Optional[PhysicalConstants] = None
) -> float:
    """
    Rotating-frame spin displacement after the RF pulse, in units of hbar.

    J_perp = Gamma B_RF J_x T2 (1 - exp(-tau/T2)) / 2 with J_x = F N_total.
    """
    constants = constants or PhysicalConstants()
    if rf.duration <= 0:
        raise ValueError(f"RF duration must be positive, got {rf.duration}")
    j_x = ensemble.macroscopic_spin(constants.spin)
    growth = ensemble.t2_dark * -np.expm1(-rf.duration / ensemble.t2_dark)
    return float(constants.gyromagnetic_ratio * rf.amplitude * j_x * growth / 2.0)


def rf_displacement(
    rf: RFPulse, ensemble: EnsembleParams, constants: Optional[PhysicalConstants] = None
) -> Displacement:
    """
    Normalized displacement (y, z) produced by the RF pulse.

    The magnitude is (B_RF / B_min(tau)) / sqrt(2), so B_RF = B_min gives
    a displacement of one projection-noise standard deviation. Phase 0
    displaces z and phase pi/2 displaces y.
    """
    constants = constants or PhysicalConstants()
    magnitude = rf_response(rf, ensemble, constants) / np.sqrt(
        constants.spin * ensemble.n_total
    )
    return Displacement(
        y=float(magnitude * np.sin(rf.phase)), z=float(magnitude * np.cos(rf.phase))
    )


def rf_displacement_stepwise(
    rf: RFPulse,
    ensemble: EnsembleParams,
    constants: Optional[PhysicalConstants] = None,
    n_steps: int = 10000,
) -> Displacement:
    """
    Forward-Euler integration of dJ/dt = -J/T2 + Gamma B_RF J_x / 2.

    Converges to :func:`rf_displacement` as ``n_steps`` grows.
    """
    constants = constants or PhysicalConstants()
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}")
    dt = rf.duration / n_steps
    drive = constants.gyromagnetic_ratio * rf.amplitude * ensemble.macroscopic_spin(constants.spin) / 2.0
    j = 0.0
    for _ in range(n_steps):
        j += (drive - j / ensemble.t2_dark) * dt
    magnitude = j / np.sqrt(constants.spin * ensemble.n_total)
    logger.debug(f"Stepwise RF displacement {magnitude:.6g} after {n_steps} steps")
    return Displacement(
        y=float(magnitude * np.sin(rf.phase)), z=float(magnitude * np.cos(rf.phase))
    )
