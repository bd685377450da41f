"""
lockin
======

Synthetic polarimeter photocurrents and software lock-in demodulation.
"""

from lockin.dsp import (
    ModeFunction,
    TimeSeries,
    check_nyquist,
    demodulate,
    peak_to_floor,
    power_spectrum,
    synthesize_photocurrent,
)

__all__ = [
    "ModeFunction",
    "TimeSeries",
    "check_nyquist",
    "demodulate",
    "peak_to_floor",
    "power_spectrum",
    "synthesize_photocurrent",
]
