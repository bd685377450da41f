"""
channels.py
===========

Gaussian channels for every physical stage of a measurement cycle.

Mode labels:
    Two cells: atom.z_plus, atom.y_plus (the EPR pair read by the probe),
    atom.y_minus, atom.z_minus (the minus sector)
    One cell: atom.z, atom.y
    Light: light.s2c, light.s2s (cos and sin components of S2 at the
    Larmor frequency), light.s3c (cos component of S3)

The probe interaction is the swap-type map

    S_out = t S_in + kappa J_in
    J_out = t J_in - xi^2 kappa S_in

with t = exp(-gamma_swap T) and xi^2 kappa^2 + t^2 = 1.

Author: Dênio Barbosa Júnior
Created: 2026-10-12
"""

from dataclasses import replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from gaussian.state import (
    VACUUM_VARIANCE,
    QuadratureState,
    append_combination,
    append_modes,
    apply_channel,
    embed_channel,
    remove_modes,
    rename_modes,
    vacuum_state,
)
from magnetometer.config import EnsembleParams, ProbeParams
from magnetometer.physics import Displacement, coupling_constant, transmissivity


Z_PLUS = "atom.z_plus"
Y_PLUS = "atom.y_plus"
Y_MINUS = "atom.y_minus"
Z_MINUS = "atom.z_minus"
Z_SINGLE = "atom.z"
Y_SINGLE = "atom.y"
S2C = "light.s2c"
S2S = "light.s2s"
S3C = "light.s3c"
LIGHT_LABELS = (S2C, S2S, S3C)

_ATOMIC_LABELS = {
    "two": (Z_PLUS, Y_PLUS, Y_MINUS, Z_MINUS),
    "one": (Z_SINGLE, Y_SINGLE),
}


def atomic_labels(cell_config: str) -> Tuple[str, ...]:
    try:
        return _ATOMIC_LABELS[cell_config]
    except KeyError:
        raise ValueError(f"Unknown cell_config '{cell_config}'") from None


def readout_pair(cell_config: str) -> Tuple[str, str]:
    """The (z, y) atomic quadratures read out by S2c and S2s."""
    if cell_config == "two":
        return Z_PLUS, Y_PLUS
    if cell_config == "one":
        return Z_SINGLE, Y_SINGLE
    raise ValueError(f"Unknown cell_config '{cell_config}'")


def pump_state(ensemble: EnsembleParams, cell_config: str) -> QuadratureState:
    """
    Freshly pumped atoms: zero mean, variance (1 + beta0) * 0.5.

    Any light modes from the previous cycle are gone.
    """
    return vacuum_state(atomic_labels(cell_config), ensemble.initial_variance)


def faraday_matrix(
    probe: ProbeParams, ensemble: EnsembleParams, cell_config: str
) -> Tuple[List[str], np.ndarray, Optional[np.ndarray]]:
    """
    Swap map of one probe pulse on its target modes.

    Returns:
        Tuple of (target labels, transfer matrix, added noise or None)

    Raises:
        ValueError: On an unknown ``cell_config``
    """
    kappa = coupling_constant(ensemble.gamma_swap, probe.duration, probe.xi_squared)
    t = transmissivity(ensemble.gamma_swap, probe.duration)
    xk = probe.xi_squared * kappa

    if cell_config == "two":
        targets = [Z_PLUS, Y_PLUS, Y_MINUS, S2C, S2S, S3C]
        m = np.array([
            [t, 0.0, 0.0, -xk, 0.0, 0.0],
            [0.0, t, 0.0, 0.0, -xk, 0.0],
            [0.0, 0.0, t, 0.0, 0.0, kappa],
            [kappa, 0.0, 0.0, t, 0.0, 0.0],
            [0.0, kappa, 0.0, 0.0, t, 0.0],
            [0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        ])
        return targets, m, None
    if cell_config == "one":
        targets = [Z_SINGLE, Y_SINGLE, S2C, S2S]
        m = np.array([
            [t, 0.0, -xk, 0.0],
            [0.0, t, 0.0, -xk],
            [kappa, 0.0, t, 0.0],
            [0.0, kappa, 0.0, t],
        ])
        return targets, m, np.diag([kappa**2 / 4.0, kappa**2 / 4.0, 0.0, 0.0])
    raise ValueError(f"Unknown cell_config '{cell_config}'")


def faraday_pass(
    state: QuadratureState,
    probe: ProbeParams,
    ensemble: EnsembleParams,
    cell_config: str,
    s3c_mean: float = 0.0,
) -> Tuple[QuadratureState, Tuple[str, str, str]]:
    """
    One probe pulse through the atoms.

    Appends fresh light modes (vacuum, except an optional mean on S3c)
    and applies the swap map. In the two-cell configuration S2c couples
    to z_plus and S2s to y_plus, S3c writes into y_minus and z_minus is
    untouched. The one-cell configuration reads z and y the same way and
    picks up kappa^2 / 4 of back-action noise on both quadratures.

    Args:
        state: Atomic state without light modes
        probe: Probe pulse parameters
        ensemble: Supplies gamma_swap
        cell_config: "two" or "one"
        s3c_mean: Mean of the incoming S3c quadrature

    Returns:
        Tuple of (new state, labels of the emerging S2c, S2s, S3c)

    Raises:
        ValueError: If light modes are already present or the labels do
            not match ``cell_config``
    """
    present = [label for label in LIGHT_LABELS if state.has(label)]
    if present:
        raise ValueError(f"Light modes already present before probe pass: {present}")

    targets, m, back_action = faraday_matrix(probe, ensemble, cell_config)
    state = append_modes(state, LIGHT_LABELS, mean=[0.0, 0.0, s3c_mean])
    channel = embed_channel(state, targets, matrix=m, added_noise=back_action)
    return apply_channel(state, channel), LIGHT_LABELS


def decoherence_channel(
    state: QuadratureState,
    modes: Sequence[str],
    gamma: float,
    dt: float,
    noise_floor_variance: Optional[float] = None,
    beta0: float = 0.0,
) -> QuadratureState:
    """
    Relax ``modes`` toward a noise floor at rate ``gamma`` for ``dt``.

    Means shrink by exp(-gamma dt) and variances move toward the floor as
    V -> exp(-2 gamma dt) V + (1 - exp(-2 gamma dt)) floor. The floor
    defaults to (1 + beta0) * 0.5.

    Raises:
        ValueError: On negative rate or time
    """
    if gamma < 0 or dt < 0:
        raise ValueError(f"Decoherence rate and time must be non-negative, got {gamma}, {dt}")
    floor = (1.0 + beta0) * VACUUM_VARIANCE if noise_floor_variance is None else noise_floor_variance
    decay = float(np.exp(-gamma * dt))
    k = len(modes)
    return apply_channel(
        state,
        embed_channel(
            state,
            modes,
            matrix=decay * np.eye(k),
            added_noise=(1.0 - decay**2) * floor * np.eye(k),
        ),
    )


def detection_loss(
    state: QuadratureState, modes: Sequence[str], eta: float
) -> QuadratureState:
    """
    Beam-splitter loss with vacuum admixture.

    Raises:
        ValueError: If eta is outside [0, 1]
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError(f"Detection efficiency must be in [0, 1], got {eta}")
    k = len(modes)
    return apply_channel(
        state,
        embed_channel(
            state,
            modes,
            matrix=np.sqrt(eta) * np.eye(k),
            added_noise=(1.0 - eta) * VACUUM_VARIANCE * np.eye(k),
        ),
    )


def spin_flip(state: QuadratureState) -> QuadratureState:
    """
    Swap the plus and minus sectors of the two-cell state.

    Models the pi pulse that exchanges the roles of the two cells.
    Applying it twice returns the original state.
    """
    for label in (Z_PLUS, Y_PLUS, Y_MINUS, Z_MINUS):
        state.index(label)
    permutation = np.array([
        [0.0, 0.0, 0.0, 1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [1.0, 0.0, 0.0, 0.0],
    ])
    return apply_channel(
        state, embed_channel(state, [Z_PLUS, Y_PLUS, Y_MINUS, Z_MINUS], matrix=permutation)
    )


def displace(
    state: QuadratureState, displacement: Displacement, cell_config: str
) -> QuadratureState:
    """Add the RF displacement to the readout quadratures."""
    z_label, y_label = readout_pair(cell_config)
    return apply_channel(
        state,
        embed_channel(state, [z_label, y_label], offset=[displacement.z, displacement.y]),
    )


def rf_pulse_channel(
    state: QuadratureState,
    displacement: Displacement,
    ensemble: EnsembleParams,
    duration: float,
    cell_config: str,
) -> QuadratureState:
    """
    RF pulse of length ``duration`` in the dark.

    The atoms decohere at 1/T2 toward the pumped-state floor over the
    pulse; the displacement already includes the T2 growth factor and
    is added at the end.
    """
    state = decoherence_channel(
        state,
        atomic_labels(cell_config),
        1.0 / ensemble.t2_dark,
        duration,
        noise_floor_variance=ensemble.initial_variance,
    )
    return displace(state, displacement, cell_config)


def lumped_probe(
    state: QuadratureState,
    probe: ProbeParams,
    ensemble: EnsembleParams,
    cell_config: str,
    s3c_mean: float = 0.0,
) -> Tuple[QuadratureState, Tuple[str, str, str]]:
    """
    Probe pulse with extra decoherence split around the swap map.

    Half of the pulse worth of gamma_extra decoherence acts before the
    Faraday pass and half after it.
    """
    atoms = atomic_labels(cell_config)
    half = probe.duration / 2.0
    floor = ensemble.initial_variance
    state = decoherence_channel(state, atoms, ensemble.gamma_extra, half, floor)
    state, light = faraday_pass(state, probe, ensemble, cell_config, s3c_mean=s3c_mean)
    state = decoherence_channel(state, atoms, ensemble.gamma_extra, half, floor)
    return state, light


def mode_weights(
    gamma: float, sign: str, n_slices: int, duration: float
) -> np.ndarray:
    """
    Discretized exponential mode function, one weight per slice.

    Evaluated at slice midpoints and normalized so the squared weights
    sum to one.
    """
    if sign not in ("rising", "falling"):
        raise ValueError(f"mode sign must be 'rising' or 'falling', got '{sign}'")
    dt = duration / n_slices
    midpoints = (np.arange(n_slices) + 0.5) * dt
    exponent = -gamma * midpoints if sign == "falling" else gamma * (midpoints - duration)
    weights = np.exp(exponent)
    return weights / np.sqrt(np.sum(weights**2))


def temporal_readout(
    state: QuadratureState,
    probe: ProbeParams,
    ensemble: EnsembleParams,
    cell_config: str,
    n_slices: int = 40,
) -> Tuple[QuadratureState, Tuple[str, str]]:
    """
    Probe pulse resolved in time and detected in an exponential mode.

    The pulse is cut into ``n_slices`` short Faraday passes with extra
    decoherence between them. The light emerging from each slice is kept
    and finally combined with the weights of the probe's mode function
    (``mode_gamma``, ``mode_sign``) into the detected S2c and S2s. With
    ``mode_gamma`` equal to gamma_swap (falling) and no extra decoherence
    this reproduces :func:`faraday_pass` exactly.

    Returns:
        Tuple of (state with atoms and the detected S2c, S2s, their labels)
    """
    if n_slices < 1:
        raise ValueError(f"n_slices must be at least 1, got {n_slices}")
    atoms = atomic_labels(cell_config)
    dt = probe.duration / n_slices
    slice_probe = replace(probe, duration=dt)
    floor = ensemble.initial_variance
    cos_labels: List[str] = []
    sin_labels: List[str] = []

    for k in range(n_slices):
        state = decoherence_channel(state, atoms, ensemble.gamma_extra, dt / 2.0, floor)
        state, _ = faraday_pass(state, slice_probe, ensemble, cell_config)
        state = decoherence_channel(state, atoms, ensemble.gamma_extra, dt / 2.0, floor)
        state = remove_modes(state, [S3C])
        cos_label, sin_label = f"{S2C}.{k}", f"{S2S}.{k}"
        state = rename_modes(state, {S2C: cos_label, S2S: sin_label})
        cos_labels.append(cos_label)
        sin_labels.append(sin_label)

    weights = mode_weights(probe.mode_gamma, probe.mode_sign, n_slices, probe.duration)
    state = append_combination(state, dict(zip(cos_labels, weights)), S2C)
    state = append_combination(state, dict(zip(sin_labels, weights)), S2S)
    state = remove_modes(state, cos_labels + sin_labels)
    logger.debug(
        f"Temporal readout: {n_slices} slices, mode {probe.mode_sign} "
        f"at {probe.mode_gamma:.1f} s^-1"
    )
    return state, (S2C, S2S)
