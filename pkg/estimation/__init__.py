"""
estimation
==========

Figures of merit, lifetime fits, sweeps and mode optimization.

Example:
    >>> from estimation import analyze_analytic
    >>> from magnetometer import baseline_config
    >>> point = analyze_analytic(baseline_config(), "pn")
"""

from estimation.figures import (
    conditional_residuals,
    displacement_calibration,
    epr_criterion,
    kappa_from_displacement,
    noise_budget,
    sensitivity,
    sensitivity_report,
    snr,
)
from estimation.fitting import LifetimeFit, fit_exponential_lifetime
from estimation.optimize import ModeOptimization, optimize_mode_gamma
from estimation.readout import (
    ReadoutPoint,
    analyze_analytic,
    analyze_monte_carlo,
    rf_calibrated_kappa,
)
from estimation.sweeps import run_sweep

__all__ = [
    "LifetimeFit",
    "ModeOptimization",
    "ReadoutPoint",
    "analyze_analytic",
    "analyze_monte_carlo",
    "conditional_residuals",
    "displacement_calibration",
    "epr_criterion",
    "fit_exponential_lifetime",
    "kappa_from_displacement",
    "noise_budget",
    "optimize_mode_gamma",
    "rf_calibrated_kappa",
    "run_sweep",
    "sensitivity",
    "sensitivity_report",
    "snr",
]
