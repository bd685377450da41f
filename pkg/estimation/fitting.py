"""
fitting.py
==========

Exponential recovery fit for the lifetime of the entangled state.

The conditional atomic noise rises from its squeezed value back toward
the unentangled floor as V(t) = floor - amplitude * exp(-t / T). The fit
returns T as the entanglement lifetime.

Author: Dênio Barbosa Júnior
Created: 2026-10-14
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from loguru import logger
from scipy import optimize


@dataclass
class LifetimeFit:
    """
    Fitted exponential recovery.

    Attributes:
        lifetime: Time constant T, seconds
        floor: Asymptotic variance
        amplitude: floor - V(0)
        lifetime_stderr: Standard error of T from the fit covariance
        residual_norm: Root-mean-square residual
    """

    lifetime: float
    floor: float
    amplitude: float
    lifetime_stderr: float
    residual_norm: float

    def predict(self, delays: Sequence[float]) -> np.ndarray:
        return recovery_model(np.asarray(delays, dtype=float), self.floor, self.amplitude, self.lifetime)


def recovery_model(t: np.ndarray, floor: float, amplitude: float, lifetime: float) -> np.ndarray:
    return floor - amplitude * np.exp(-t / lifetime)


def fit_exponential_lifetime(
    delays: Sequence[float],
    variances: Sequence[float],
    weights: Optional[Sequence[float]] = None,
) -> LifetimeFit:
    """
    Weighted least-squares fit of an exponential recovery.

    Args:
        delays: Delay values, seconds
        variances: Noise at each delay
        weights: Optional inverse-variance weights

    Returns:
        Fitted lifetime and curve parameters

    Raises:
        ValueError: With fewer than three distinct delays or constant data
        RuntimeError: If the fit does not converge
    """
    t = np.asarray(delays, dtype=float)
    v = np.asarray(variances, dtype=float)
    if t.shape != v.shape:
        raise ValueError("delays and variances must have the same length")
    if len(np.unique(t)) < 3:
        raise ValueError("Lifetime fit needs at least three distinct delays")
    if np.ptp(v) <= 1e-12 * max(1.0, float(np.max(np.abs(v)))):
        raise ValueError("Variances are constant; the lifetime is undetermined")

    sigma = None
    if weights is not None:
        w = np.asarray(weights, dtype=float)
        if w.shape != t.shape or np.any(w <= 0):
            raise ValueError("weights must be positive, one per delay")
        sigma = 1.0 / np.sqrt(w)

    order = np.argsort(t)
    floor0 = float(v[order[-1]])
    amplitude0 = floor0 - float(v[order[0]])
    lifetime0 = max(float(np.ptp(t)) / 3.0, np.finfo(float).eps)

    try:
        params, covariance = optimize.curve_fit(
            recovery_model,
            t,
            v,
            p0=[floor0, amplitude0, lifetime0],
            sigma=sigma,
            absolute_sigma=sigma is not None,
            bounds=([-np.inf, -np.inf, 1e-9], [np.inf, np.inf, np.inf]),
            maxfev=10000,
        )
    except (RuntimeError, optimize.OptimizeWarning) as e:
        logger.error(f"Lifetime fit failed: {e}")
        raise RuntimeError(f"Lifetime fit did not converge: {e}") from e

    floor, amplitude, lifetime = (float(p) for p in params)
    residuals = v - recovery_model(t, floor, amplitude, lifetime)
    lifetime_var = float(covariance[2, 2]) if np.all(np.isfinite(covariance)) else float("nan")
    logger.info(f"Fitted lifetime {lifetime * 1e3:.3f} ms")
    return LifetimeFit(
        lifetime=lifetime,
        floor=floor,
        amplitude=amplitude,
        lifetime_stderr=float(np.sqrt(lifetime_var)) if lifetime_var >= 0 else float("nan"),
        residual_norm=float(np.sqrt(np.mean(residuals**2))),
    )
