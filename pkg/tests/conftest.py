"""
conftest.py
===========

Pytest configuration and shared fixtures.

Author: Dênio Barbosa Júnior
Created: 2026-10-15
"""

from dataclasses import replace

import numpy as np
import pytest

from gaussian.state import make_state
from magnetometer.config import SimConfig, baseline_config, entanglement_config


@pytest.fixture
def baseline() -> SimConfig:
    """Projection-noise experiment parameters."""
    return baseline_config()


@pytest.fixture
def entangled() -> SimConfig:
    """Entanglement experiment parameters (kappa^2 = 3.1 readout)."""
    return entanglement_config()


@pytest.fixture
def ideal() -> SimConfig:
    """Entanglement parameters without excess noise, extra decoherence or loss."""
    config = entanglement_config()
    return replace(
        config,
        ensemble=replace(config.ensemble, beta0=0.0, gamma_extra=0.0),
        probe1=replace(config.probe1, eta_detection=1.0),
        probe2=replace(config.probe2, eta_detection=1.0),
    )


@pytest.fixture
def time_domain(baseline) -> SimConfig:
    """
    PN readout on the time-domain path with a low carrier for speed.

    The detected mode matches the swap rate and extra decoherence is off,
    so the lock-in outcomes follow the same Gaussian law as the mode path.
    """
    return replace(
        baseline,
        ensemble=replace(baseline.ensemble, gamma_extra=0.0),
        probe2=replace(baseline.probe2, mode_gamma=baseline.ensemble.gamma_swap),
        rf=replace(baseline.rf, amplitude=5e-15, carrier=2 * np.pi * 20e3),
        lockin=replace(baseline.lockin, sample_rate=200e3),
        readout_path="time",
    )


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded random generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def correlated_pair():
    """Two correlated quadratures x and m with Var(x)=1, Var(m)=2, Cov=0.6."""
    return make_state(["x", "m"], [0.0, 1.0], [[1.0, 0.6], [0.6, 2.0]])
