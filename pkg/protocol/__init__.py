"""
protocol
========

Measurement sequences and Monte Carlo ensembles.

Functions:
    run_pn_protocol: Projection-noise-limited cycle
    run_entanglement_protocol: Entanglement-assisted cycle
    run_calibration_protocol: Coupling-constant calibration
    monte_carlo: Ensemble of independent shots with deterministic seeding
"""

from protocol.monte_carlo import (
    CalibrationResult,
    ShotEnsemble,
    derive_seed,
    monte_carlo,
    run_calibration_protocol,
    shot_rng,
)
from protocol.sequences import (
    ShotRecord,
    build_sequence,
    execute_sequence,
    readout_moments,
    run_calibration_shot,
    run_entanglement_protocol,
    run_pn_protocol,
)

__all__ = [
    "CalibrationResult",
    "ShotEnsemble",
    "ShotRecord",
    "build_sequence",
    "derive_seed",
    "execute_sequence",
    "monte_carlo",
    "readout_moments",
    "run_calibration_protocol",
    "run_calibration_shot",
    "run_entanglement_protocol",
    "run_pn_protocol",
    "shot_rng",
]
