"""
dsp.py
======

Time-domain photocurrent synthesis and lock-in demodulation.

The polarimeter signal is modeled as a sampled photocurrent: white shot
noise plus the atomic spin projection imprinted at the Larmor frequency.
Demodulating with sqrt(2) cos / sqrt(2) sin carriers weighted by a
temporal mode function gives the same S2c / S2s outcomes that the
Gaussian-level model produces directly.

Samples are bin-integrated photon counts scaled so that shot noise per
sample has variance photon_rate * dt / 2.

Author: Dênio Barbosa Júnior
Created: 2026-10-13
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from loguru import logger
from scipy import fft, signal
from scipy.integrate import trapezoid


@dataclass
class TimeSeries:
    """
    Uniformly sampled photocurrent.

    Attributes:
        sample_rate: Samples per second
        samples: Bin-integrated photocurrent, one value per sample
        photon_rate: Photons per second used to scale the samples
    """

    sample_rate: float
    samples: np.ndarray
    photon_rate: float = 0.0

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self.samples)) * self.dt

    @property
    def duration(self) -> float:
        return len(self.samples) * self.dt

    @property
    def flux_scale(self) -> float:
        return float(np.sqrt(self.photon_rate)) if self.photon_rate > 0 else 1.0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t_or_f": self.times, "value": self.samples})


@dataclass
class ModeFunction:
    """
    Exponential temporal mode exp(-gamma t) (falling) or exp(+gamma t) (rising).

    Attributes:
        gamma: Rate, s^-1
        sign: "falling" or "rising"
        duration: Pulse length, seconds
    """

    gamma: float
    sign: str
    duration: float

    def __post_init__(self) -> None:
        if self.sign not in ("rising", "falling"):
            raise ValueError(f"mode sign must be 'rising' or 'falling', got '{self.sign}'")
        if self.gamma < 0 or self.duration <= 0:
            raise ValueError("mode gamma must be non-negative and duration positive")

    def weights(self, times: np.ndarray) -> np.ndarray:
        """Mode values on ``times``, normalized by the trapezoid rule."""
        if self.sign == "falling":
            values = np.exp(-self.gamma * times)
        else:
            values = np.exp(self.gamma * (times - self.duration))
        norm = trapezoid(values**2, times) if len(times) > 1 else float(values[0] ** 2)
        return values / np.sqrt(norm)


def check_nyquist(
    sample_rate: float, carrier: float, detection_bandwidth: float = 0.0
) -> None:
    """
    Reject sample rates that alias the carrier.

    Raises:
        ValueError: If sample_rate <= 2 (carrier/2pi + detection_bandwidth)
    """
    limit = 2.0 * (carrier / (2.0 * np.pi) + detection_bandwidth)
    if sample_rate <= limit:
        raise ValueError(
            f"Sample rate {sample_rate:.4g} Hz does not exceed the Nyquist limit {limit:.4g} Hz"
        )


def _ou_trajectory(
    initial: float, decay: float, drive: np.ndarray
) -> np.ndarray:
    """x[k] = decay**k x0 + sum_{j<k} decay**(k-1-j) drive[j], vectorized."""
    powers = decay ** np.arange(len(drive))
    return initial * powers + signal.lfilter([0.0, 1.0], [1.0, -decay], drive)


def synthesize_photocurrent(
    atomic_mean: Sequence[float],
    atomic_cov: np.ndarray,
    omega: float,
    photon_rate: float,
    duration: float,
    sample_rate: float,
    rng: np.random.Generator,
    gamma_swap: float = 0.0,
    xi_squared: float = 1.0,
    gamma_extra: float = 0.0,
    noise_floor: float = 0.5,
    eta: float = 1.0,
    signal_gain: Optional[float] = None,
    detection_bandwidth: float = 0.0,
) -> TimeSeries:
    """
    Synthesize the polarimeter photocurrent of one probe pulse.

    The rotating-frame atomic quadratures (z, y) start from a draw of
    N(atomic_mean, atomic_cov) and follow an Ornstein-Uhlenbeck process:
    they decay at gamma_swap + gamma_extra, are driven by the light that
    enters the atoms and by gamma_extra noise toward ``noise_floor``.
    The emerging light carries sqrt(2 gamma_swap / xi^2) times the atomic
    signal on sqrt(2) cos and sqrt(2) sin carriers. A fraction 1 - eta
    of the detected light is replaced by vacuum.

    Args:
        atomic_mean: (z, y) mean, normalized units
        atomic_cov: 2x2 covariance of (z, y), or a scalar variance
        omega: Carrier angular frequency, rad/s
        photon_rate: Photons per second; 0 gives a noiseless trace
        duration: Pulse length, seconds
        sample_rate: Samples per second
        rng: Random generator
        gamma_swap: Swap rate, s^-1
        xi_squared: Polarizability factor
        gamma_extra: Extra decoherence rate, s^-1
        noise_floor: Variance the extra decoherence relaxes toward
        eta: Detection efficiency
        signal_gain: Override of the light-atom coupling amplitude, s^-1/2
        detection_bandwidth: Detector bandwidth above the carrier, Hz

    Returns:
        Sampled photocurrent

    Raises:
        ValueError: If the sample rate violates Nyquist or inputs are invalid
    """
    check_nyquist(sample_rate, omega, detection_bandwidth)
    if duration <= 0:
        raise ValueError(f"duration must be positive, got {duration}")
    if photon_rate < 0:
        raise ValueError(f"photon_rate must be non-negative, got {photon_rate}")
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"eta must be in [0, 1], got {eta}")

    n = int(round(duration * sample_rate))
    dt = 1.0 / sample_rate
    t = np.arange(n) * dt
    carrier_z = np.sqrt(2.0) * np.cos(omega * t)
    carrier_y = np.sqrt(2.0) * np.sin(omega * t)

    cov = np.asarray(atomic_cov, dtype=float)
    if cov.ndim == 0:
        cov = float(cov) * np.eye(2)
    z0, y0 = rng.multivariate_normal(np.asarray(atomic_mean, dtype=float), cov)

    if photon_rate > 0:
        light_in = rng.normal(0.0, np.sqrt(dt / 2.0), n)
        loss_vacuum = rng.normal(0.0, np.sqrt(dt / 2.0), n)
    else:
        light_in = np.zeros(n)
        loss_vacuum = np.zeros(n)

    gain = np.sqrt(2.0 * gamma_swap / xi_squared) if signal_gain is None else signal_gain
    back_action = np.sqrt(2.0 * gamma_swap * xi_squared)
    decay = float(np.exp(-(gamma_swap + gamma_extra) * dt))
    extra_std = float(np.sqrt(-np.expm1(-2.0 * gamma_extra * dt) * noise_floor))

    if extra_std > 0:
        extra_z = rng.normal(0.0, extra_std, n)
        extra_y = rng.normal(0.0, extra_std, n)
    else:
        extra_z = extra_y = np.zeros(n)

    z = _ou_trajectory(z0, decay, -back_action * carrier_z * light_in + extra_z)
    y = _ou_trajectory(y0, decay, -back_action * carrier_y * light_in + extra_y)

    emerging = light_in + gain * (carrier_z * z + carrier_y * y) * dt
    photocurrent = np.sqrt(eta) * emerging + np.sqrt(1.0 - eta) * loss_vacuum
    series = TimeSeries(sample_rate=sample_rate, samples=photocurrent, photon_rate=photon_rate)
    series.samples = photocurrent * series.flux_scale
    return series


def demodulate(
    series: TimeSeries, omega: float, mode: ModeFunction, phase: float = 0.0
) -> Tuple[float, float]:
    """
    Lock-in demodulation into one temporal mode.

    S2c = sum_k p_k sqrt(2) cos(omega t_k + phase) f(t_k) / sqrt(photon_rate),
    likewise S2s with sin, where f is the mode function normalized to
    unit energy over the pulse.

    Args:
        series: Photocurrent
        omega: Reference angular frequency, rad/s
        mode: Temporal mode to project on
        phase: Reference phase

    Returns:
        (S2c, S2s) in normalized units

    Raises:
        ValueError: If the series is shorter than the mode
    """
    n = int(round(mode.duration * series.sample_rate))
    if n > len(series.samples):
        raise ValueError(
            f"Time series of {series.duration:.4g} s is shorter than the "
            f"{mode.duration:.4g} s mode"
        )
    t = series.times[:n]
    p = series.samples[:n] / series.flux_scale
    f = mode.weights(t)
    s_c = float(np.sum(p * np.sqrt(2.0) * np.cos(omega * t + phase) * f))
    s_s = float(np.sum(p * np.sqrt(2.0) * np.sin(omega * t + phase) * f))
    return s_c, s_s


def power_spectrum(series: TimeSeries) -> pd.DataFrame:
    """
    One-sided power spectrum of the raw samples.

    Scaled so that the powers sum to the sum of squared samples.

    Returns:
        DataFrame with columns frequency (Hz) and power
    """
    x = np.asarray(series.samples, dtype=float)
    n = len(x)
    if n == 0:
        raise ValueError("Cannot take the spectrum of an empty time series")
    power = np.abs(fft.rfft(x)) ** 2 / n
    if n % 2 == 0:
        power[1:-1] *= 2.0
    else:
        power[1:] *= 2.0
    return pd.DataFrame({
        "frequency": fft.rfftfreq(n, d=series.dt),
        "power": power,
    })


def peak_to_floor(spectrum: pd.DataFrame, frequency: float, window: float) -> float:
    """Largest power within ``window`` Hz of ``frequency`` over the median power."""
    near = (spectrum["frequency"] - frequency).abs() <= window
    if not near.any():
        raise ValueError(f"No spectral bins within {window} Hz of {frequency} Hz")
    floor = float(spectrum["power"].median())
    peak = float(spectrum.loc[near, "power"].max())
    logger.debug(f"Spectral peak {peak:.4g} over floor {floor:.4g} near {frequency:.4g} Hz")
    return peak / floor if floor > 0 else float("inf")
