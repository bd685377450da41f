"""
sequences.py
============

Pulse sequences and the single-shot interpreter that runs them.

A sequence is a list of steps (pump, probe, delay, rf, spin_flip). The
interpreter threads one Gaussian state through the steps, samples the
homodyne outcomes of every measured probe and conditions the atoms on
them. Without a random generator it runs the analytic path: outcomes are
set to their means, so the conditional covariances are exact and the
record carries the pre-measurement readout moments.

Author: Dênio Barbosa Júnior
Created: 2026-10-13
"""

from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from gaussian.state import (
    QuadratureState,
    condition_on_outcome,
    marginal,
    remove_modes,
    sample_outcome,
)
from lockin.dsp import ModeFunction, demodulate, synthesize_photocurrent
from magnetometer.channels import (
    S2C,
    S2S,
    S3C,
    atomic_labels,
    decoherence_channel,
    detection_loss,
    lumped_probe,
    pump_state,
    readout_pair,
    rf_pulse_channel,
    spin_flip,
    temporal_readout,
)
from magnetometer.config import ProbeParams, SimConfig
from magnetometer.physics import rf_displacement


@dataclass
class SequenceStep:
    """
    One stage of a measurement cycle.

    Attributes:
        kind: "pump", "probe", "delay", "rf" or "spin_flip"
        duration: Stage length, seconds (probe steps use the probe's own)
        probe: Probe parameters for probe steps
        pulse_id: Name under which probe outcomes are recorded
        measure: Whether the probe's S2 light is detected
        s3c_mean: Mean of the S3c input light of the probe
    """

    kind: str
    duration: float = 0.0
    probe: Optional[ProbeParams] = None
    pulse_id: str = ""
    measure: bool = False
    s3c_mean: float = 0.0


@dataclass
class ShotRecord:
    """
    Result of one measurement cycle.

    Attributes:
        shot_id: Index of the shot in its ensemble
        protocol: Protocol name
        outcomes: (S2c, S2s) per measured pulse
        conditioned_variances: Atomic variances after conditioning, per pulse
        displacement: RF displacement (y, z) applied in this cycle
        readout_moments: Mean and covariance of (S2c, S2s) right before
            each measurement
    """

    shot_id: int
    protocol: str
    outcomes: Dict[str, Tuple[float, float]] = field(default_factory=dict)
    conditioned_variances: Dict[str, Dict[str, float]] = field(default_factory=dict)
    displacement: Tuple[float, float] = (0.0, 0.0)
    readout_moments: Dict[str, Tuple[np.ndarray, np.ndarray]] = field(
        default_factory=dict, repr=False
    )


def build_sequence(config: SimConfig, protocol: Optional[str] = None) -> List[SequenceStep]:
    """
    Steps of one measurement cycle of ``protocol``.

    pn:          pump, rf, readout probe
    entangled:   pump, entangling probe, delay, rf, readout probe
    calibration: pump, probe with S3c input, spin flip, readout probe
    """
    protocol = protocol or config.protocol
    pump = SequenceStep("pump", duration=config.pump_duration)
    rf = SequenceStep("rf", duration=config.rf.duration)
    readout = SequenceStep("probe", probe=config.probe2, pulse_id="probe2", measure=True)

    if protocol == "pn":
        return [pump, rf, readout]
    if protocol == "entangled":
        return [
            pump,
            SequenceStep("probe", probe=config.probe1, pulse_id="probe1", measure=True),
            SequenceStep("delay", duration=config.delay),
            rf,
            readout,
        ]
    if protocol == "calibration":
        return [
            pump,
            SequenceStep(
                "probe", probe=config.probe2, pulse_id="pulse1", s3c_mean=config.calibration_s3c
            ),
            SequenceStep("spin_flip"),
            SequenceStep("probe", probe=config.probe2, pulse_id="pulse2", measure=True),
        ]
    raise ValueError(f"Unknown protocol '{protocol}'")


def _time_domain_outcome(
    state: QuadratureState, probe: ProbeParams, config: SimConfig, rng: np.random.Generator
) -> Tuple[float, float]:
    z_label, y_label = readout_pair(config.cell_config)
    atoms = marginal(state, [z_label, y_label])
    omega = config.carrier_frequency()
    series = synthesize_photocurrent(
        atomic_mean=atoms.mean,
        atomic_cov=atoms.cov,
        omega=omega,
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
    return demodulate(series, omega, ModeFunction(probe.mode_gamma, probe.mode_sign, probe.duration))


def _probe_step(
    state: QuadratureState,
    step: SequenceStep,
    config: SimConfig,
    rng: Optional[np.random.Generator],
    record: ShotRecord,
    is_last: bool,
) -> QuadratureState:
    probe = step.probe
    ensemble = config.ensemble
    atoms = atomic_labels(config.cell_config)

    if step.measure and is_last and config.readout_path == "time":
        if rng is None:
            raise ValueError("The time-domain readout path needs a random generator")
        if config.cell_config != "two":
            raise ValueError("The time-domain readout path models the two-cell configuration")
        record.outcomes[step.pulse_id] = _time_domain_outcome(state, probe, config, rng)
        return state

    if config.readout_model == "temporal" and step.s3c_mean == 0.0:
        state, _ = temporal_readout(state, probe, ensemble, config.cell_config, config.n_slices)
    else:
        state, _ = lumped_probe(
            state, probe, ensemble, config.cell_config, s3c_mean=step.s3c_mean
        )
        state = remove_modes(state, [S3C])

    if not step.measure:
        return remove_modes(state, [S2C, S2S])

    state = detection_loss(state, [S2C, S2S], probe.eta_detection)
    light = marginal(state, [S2C, S2S])
    record.readout_moments[step.pulse_id] = (np.array(light.mean), np.array(light.cov))

    outcomes = []
    for label in (S2C, S2S):
        value = state.mean_of(label) if rng is None else sample_outcome(state, label, rng)
        state = condition_on_outcome(state, label, value)
        outcomes.append(value)
    record.outcomes[step.pulse_id] = (outcomes[0], outcomes[1])
    record.conditioned_variances[step.pulse_id] = {
        label: state.variance(label) for label in atoms
    }
    return state


def execute_sequence(
    steps: List[SequenceStep],
    config: SimConfig,
    rng: Optional[np.random.Generator] = None,
    shot_id: int = 0,
    protocol: Optional[str] = None,
) -> Tuple[ShotRecord, QuadratureState]:
    """
    Run one measurement cycle.

    Args:
        steps: Sequence from :func:`build_sequence`
        config: Simulation configuration
        rng: Random generator; None selects the analytic path
        shot_id: Shot index recorded in the result
        protocol: Protocol name recorded in the result

    Returns:
        Tuple of (shot record, final atomic state)

    Raises:
        ValueError: If the sequence does not start with a pump or has an
            unknown step
    """
    if not steps or steps[0].kind != "pump":
        raise ValueError("A measurement sequence must start with a pump step")

    record = ShotRecord(shot_id=shot_id, protocol=protocol or config.protocol)
    ensemble = config.ensemble
    atoms = atomic_labels(config.cell_config)
    last_probe = max((i for i, step in enumerate(steps) if step.kind == "probe"), default=-1)
    state: QuadratureState = pump_state(ensemble, config.cell_config)

    for i, step in enumerate(steps):
        if step.kind == "pump":
            state = pump_state(ensemble, config.cell_config)
        elif step.kind == "delay":
            state = decoherence_channel(
                state, atoms, 1.0 / ensemble.t2_dark, step.duration,
                noise_floor_variance=ensemble.initial_variance,
            )
        elif step.kind == "rf":
            displacement = rf_displacement(config.rf, ensemble, config.constants)
            record.displacement = (displacement.y, displacement.z)
            state = rf_pulse_channel(
                state, displacement, ensemble, step.duration, config.cell_config
            )
        elif step.kind == "spin_flip":
            state = spin_flip(state)
        elif step.kind == "probe":
            state = _probe_step(state, step, config, rng, record, is_last=(i == last_probe))
        else:
            raise ValueError(f"Unknown sequence step '{step.kind}'")

    return record, state


def run_pn_protocol(
    config: SimConfig, rng: Optional[np.random.Generator] = None, shot_id: int = 0
) -> ShotRecord:
    """Projection-noise-limited cycle: pump, RF, readout."""
    record, _ = execute_sequence(build_sequence(config, "pn"), config, rng, shot_id, "pn")
    return record


def run_entanglement_protocol(
    config: SimConfig, rng: Optional[np.random.Generator] = None, shot_id: int = 0
) -> ShotRecord:
    """
    Entanglement-assisted cycle: pump, entangling probe, delay, RF, readout.

    The entangling probe's outcomes condition the atoms, which squeezes
    the EPR variance of the plus pair below projection noise.

    Raises:
        ValueError: For the one-cell configuration
    """
    if config.cell_config != "two":
        raise ValueError("Entanglement protocol requires the two-cell configuration")
    record, _ = execute_sequence(
        build_sequence(config, "entangled"), config, rng, shot_id, "entangled"
    )
    return record


def run_calibration_shot(
    config: SimConfig, rng: Optional[np.random.Generator] = None, shot_id: int = 0
) -> ShotRecord:
    """
    One cycle of the coupling calibration.

    A probe with a displaced S3c input writes kappa <S3c> into y_minus,
    a spin flip moves it to y_plus, and the readout probe maps it onto
    S2s with a further factor kappa.

    Raises:
        ValueError: For the one-cell configuration or a zero S3c input
    """
    if config.cell_config != "two":
        raise ValueError("Calibration protocol requires the two-cell configuration")
    if config.calibration_s3c == 0:
        raise ValueError("Calibration needs a non-zero S3c input displacement")
    record, _ = execute_sequence(
        build_sequence(config, "calibration"), config, rng, shot_id, "calibration"
    )
    return record


PROTOCOL_RUNNERS: Dict[str, Callable[..., ShotRecord]] = {
    "pn": run_pn_protocol,
    "entangled": run_entanglement_protocol,
    "calibration": run_calibration_shot,
}


def readout_moments(
    config: SimConfig, protocol: Optional[str] = None
) -> Dict[str, Tuple[np.ndarray, np.ndarray]]:
    """
    Exact mean and covariance of every measured (S2c, S2s) pair.

    Later pulses are conditioned on the earlier outcomes being at their
    means; their covariance is the conditional one for any outcomes.
    """
    protocol = protocol or config.protocol
    record = PROTOCOL_RUNNERS[protocol](replace(config, readout_path="mode"), None)
    logger.debug(f"Analytic readout moments for '{protocol}': {list(record.readout_moments)}")
    return record.readout_moments
