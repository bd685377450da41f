"""
magnetometer
============

Physical model of the two-cell RF atomic magnetometer.

Modules:
    config: Parameter dataclasses and built-in profiles
    physics: Closed-form relations (Larmor frequency, coupling, PN limit)
    channels: Gaussian channels for probe, decoherence, pump and RF pulses

Example:
    >>> from magnetometer import baseline_config, pn_limited_sensitivity
    >>> config = baseline_config()
    >>> limit = pn_limited_sensitivity(config.ensemble, config.rf.duration)
"""

__version__ = "1.0.0"

from magnetometer.config import (  # noqa: E402
    EnsembleParams,
    LockinParams,
    OutputSpec,
    PhysicalConstants,
    ProbeParams,
    RFPulse,
    SimConfig,
    SweepSpec,
    baseline_config,
    entanglement_config,
)
from magnetometer.physics import (  # noqa: E402
    coupling_constant,
    larmor_frequency,
    pn_limited_sensitivity,
    rf_displacement,
    xi_squared,
)

__all__ = [
    "EnsembleParams",
    "LockinParams",
    "OutputSpec",
    "PhysicalConstants",
    "ProbeParams",
    "RFPulse",
    "SimConfig",
    "SweepSpec",
    "baseline_config",
    "coupling_constant",
    "entanglement_config",
    "larmor_frequency",
    "pn_limited_sensitivity",
    "rf_displacement",
    "xi_squared",
]
