"""
state.py
========

Multimode Gaussian states over labeled quadrature modes.

A state is a mean vector and a covariance matrix indexed by string labels
such as ``atom.z_plus`` or ``light.s2c``. Each label is one real quadrature,
normalized so the vacuum (coherent) variance is 0.5. All physics in the
simulator is expressed as affine channels acting on these states plus
homodyne conditioning on a single quadrature.

States are immutable: every operation returns a new ``QuadratureState``.

Author: Dênio Barbosa Júnior
Created: 2026-10-12
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger


VACUUM_VARIANCE = 0.5
SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-10


class StateValidationError(ValueError):
    """
    Raised when a covariance matrix is not a valid Gaussian covariance.

    Attributes:
        min_eigenvalue: Most negative eigenvalue found, when the failure
            is a positive semidefiniteness violation
    """

    def __init__(self, message: str, min_eigenvalue: Optional[float] = None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


@dataclass(frozen=True, eq=False)
class QuadratureState:
    """
    Gaussian state over an ordered set of labeled quadratures.

    Build instances through :func:`make_state`, which validates the
    covariance. The arrays are read-only.

    Attributes:
        labels: Ordered mode labels, unique
        mean: Mean vector, shape (n,)
        cov: Symmetric positive semidefinite covariance, shape (n, n)
    """

    labels: Tuple[str, ...]
    mean: np.ndarray
    cov: np.ndarray
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "_index", {label: i for i, label in enumerate(self.labels)}
        )

    @property
    def n_modes(self) -> int:
        return len(self.labels)

    def has(self, label: str) -> bool:
        return label in self._index

    def index(self, label: str) -> int:
        """
        Position of a mode label.

        Raises:
            ValueError: If the label is not part of the state
        """
        try:
            return self._index[label]
        except KeyError:
            raise ValueError(
                f"Unknown mode label '{label}'. Known labels: {list(self.labels)}"
            ) from None

    def indices(self, labels: Iterable[str]) -> List[int]:
        return [self.index(label) for label in labels]

    def mean_of(self, label: str) -> float:
        return float(self.mean[self.index(label)])

    def variance(self, label: str) -> float:
        i = self.index(label)
        return float(self.cov[i, i])

    def covariance(self, first: str, second: str) -> float:
        return float(self.cov[self.index(first), self.index(second)])


def make_state(
    labels: Sequence[str],
    mean: Sequence[float],
    cov: Sequence[Sequence[float]],
) -> QuadratureState:
    """
    Validate and build a Gaussian state.

    The covariance must be symmetric within a relative tolerance of 1e-10
    and positive semidefinite up to -1e-10 times its trace. Eigenvalues
    inside that tolerance band are clipped to zero.

    Args:
        labels: Unique mode labels
        mean: Mean vector, one entry per label
        cov: Covariance matrix, one row and column per label

    Returns:
        Validated immutable state

    Raises:
        ValueError: On duplicate labels, shape mismatch or asymmetry
        StateValidationError: If the covariance has a negative eigenvalue
            beyond tolerance

    Example:
        >>> vac = make_state(["light.s2c"], [0.0], [[0.5]])
        >>> vac.variance("light.s2c")
        0.5
    """
    labels = tuple(labels)
    if len(set(labels)) != len(labels):
        duplicates = sorted({label for label in labels if labels.count(label) > 1})
        raise ValueError(f"Duplicate mode labels: {duplicates}")

    mean_arr = np.array(mean, dtype=float).reshape(-1)
    n = len(labels)
    cov_arr = np.array(cov, dtype=float) if n else np.zeros((0, 0))

    if mean_arr.shape != (n,):
        raise ValueError(f"Mean has {mean_arr.size} entries for {n} labels")
    if cov_arr.shape != (n, n):
        raise ValueError(f"Covariance shape {cov_arr.shape} does not match {n} labels")
    if not (np.all(np.isfinite(mean_arr)) and np.all(np.isfinite(cov_arr))):
        raise ValueError("State contains non-finite values")

    if n > 0:
        scale = max(1.0, float(np.max(np.abs(cov_arr))))
        asymmetry = float(np.max(np.abs(cov_arr - cov_arr.T)))
        if asymmetry > SYMMETRY_RTOL * scale:
            raise ValueError(f"Covariance is not symmetric (max deviation {asymmetry:.3e})")
        cov_arr = 0.5 * (cov_arr + cov_arr.T)

        eigenvalues, eigenvectors = np.linalg.eigh(cov_arr)
        min_eig = float(eigenvalues[0])
        tolerance = PSD_RTOL * max(float(np.trace(cov_arr)), np.finfo(float).tiny)
        if min_eig < -tolerance:
            raise StateValidationError(
                f"Covariance is not positive semidefinite: "
                f"most negative eigenvalue {min_eig:.3e}",
                min_eigenvalue=min_eig,
            )
        if min_eig < 0.0:
            logger.debug(f"Clipping negative eigenvalue {min_eig:.3e} to zero")
            eigenvalues = np.clip(eigenvalues, 0.0, None)
            cov_arr = (eigenvectors * eigenvalues) @ eigenvectors.T
            cov_arr = 0.5 * (cov_arr + cov_arr.T)

    mean_arr.setflags(write=False)
    cov_arr.setflags(write=False)
    return QuadratureState(labels=labels, mean=mean_arr, cov=cov_arr)


def vacuum_state(labels: Sequence[str], variance: float = VACUUM_VARIANCE) -> QuadratureState:
    """Zero-mean state with ``variance`` on every mode and no correlations."""
    n = len(labels)
    return make_state(labels, np.zeros(n), variance * np.eye(n))


@dataclass(frozen=True, eq=False)
class AffineChannel:
    """
    Gaussian affine channel x -> M x + c + noise with noise covariance D.

    Attributes:
        matrix: Linear map M, shape (n, n)
        offset: Displacement c, shape (n,)
        added_noise: Symmetric PSD noise covariance D, shape (n, n)
    """

    matrix: np.ndarray
    offset: np.ndarray
    added_noise: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.array(self.matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise ValueError(f"Channel matrix must be square, got {matrix.shape}")
        n = matrix.shape[0]
        offset = np.array(self.offset, dtype=float).reshape(-1)
        noise = np.array(self.added_noise, dtype=float)
        if offset.shape != (n,):
            raise ValueError(f"Channel offset has {offset.size} entries, expected {n}")
        if noise.shape != (n, n):
            raise ValueError(f"Channel noise shape {noise.shape}, expected {(n, n)}")
        if n > 0:
            scale = max(1.0, float(np.max(np.abs(noise))))
            if float(np.max(np.abs(noise - noise.T))) > SYMMETRY_RTOL * scale:
                raise ValueError("Channel noise covariance is not symmetric")
            min_eig = float(np.linalg.eigvalsh(0.5 * (noise + noise.T))[0])
            if min_eig < -PSD_RTOL * max(float(np.trace(noise)), np.finfo(float).tiny):
                raise StateValidationError(
                    f"Channel noise covariance is not positive semidefinite "
                    f"(eigenvalue {min_eig:.3e})",
                    min_eigenvalue=min_eig,
                )
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "added_noise", noise)

    @property
    def n_modes(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def identity(cls, n: int) -> "AffineChannel":
        return cls(np.eye(n), np.zeros(n), np.zeros((n, n)))


def embed_channel(
    state: QuadratureState,
    targets: Sequence[str],
    matrix: Optional[np.ndarray] = None,
    offset: Optional[Sequence[float]] = None,
    added_noise: Optional[np.ndarray] = None,
) -> AffineChannel:
    """
    Lift a channel acting on a subset of modes to the full state.

    Modes outside ``targets`` pass through unchanged.

    Args:
        state: State whose label order defines the full channel
        targets: Labels the local channel acts on, in local order
        matrix: Local linear map (identity when omitted)
        offset: Local displacement (zero when omitted)
        added_noise: Local noise covariance (zero when omitted)

    Returns:
        Channel sized to ``state``
    """
    idx = state.indices(targets)
    k = len(idx)
    full = AffineChannel.identity(state.n_modes)
    m = np.array(full.matrix)
    c = np.array(full.offset)
    d = np.array(full.added_noise)

    if matrix is not None:
        local = np.asarray(matrix, dtype=float)
        if local.shape != (k, k):
            raise ValueError(f"Local matrix shape {local.shape}, expected {(k, k)}")
        m[np.ix_(idx, idx)] = local
    if offset is not None:
        c[idx] = np.asarray(offset, dtype=float).reshape(k)
    if added_noise is not None:
        local_noise = np.asarray(added_noise, dtype=float)
        if local_noise.shape != (k, k):
            raise ValueError(f"Local noise shape {local_noise.shape}, expected {(k, k)}")
        d[np.ix_(idx, idx)] = local_noise

    return AffineChannel(m, c, d)


def apply_channel(state: QuadratureState, channel: AffineChannel) -> QuadratureState:
    """
    Push a state through an affine Gaussian channel.

    Returns a state with mean M m + c and covariance M C M^T + D.

    Raises:
        ValueError: If the channel size does not match the state
    """
    if channel.n_modes != state.n_modes:
        raise ValueError(
            f"Channel acts on {channel.n_modes} modes, state has {state.n_modes}"
        )
    m = channel.matrix
    mean = m @ state.mean + channel.offset
    cov = m @ state.cov @ m.T + channel.added_noise
    return make_state(state.labels, mean, 0.5 * (cov + cov.T))


def condition_on_outcome(
    state: QuadratureState, mode: str, outcome: float
) -> QuadratureState:
    """
    Condition on a homodyne outcome of one quadrature.

    The measured mode is removed. The remaining modes get the Gaussian
    conditional mean and the Schur-complement covariance, which does not
    depend on ``outcome``.

    Args:
        state: Joint state containing ``mode``
        mode: Label of the measured quadrature
        outcome: Observed value

    Returns:
        Conditional state over the remaining labels

    Raises:
        ValueError: If the mode is unknown or has zero variance
    """
    i = state.index(mode)
    var_m = float(state.cov[i, i])
    if var_m <= np.finfo(float).eps * max(1.0, float(np.trace(state.cov))):
        raise ValueError(f"Cannot condition on deterministic mode '{mode}' (variance {var_m:.3e})")

    rest = [j for j in range(state.n_modes) if j != i]
    c_rm = state.cov[rest, i]
    mean = state.mean[rest] + c_rm * (outcome - state.mean[i]) / var_m
    cov = state.cov[np.ix_(rest, rest)] - np.outer(c_rm, c_rm) / var_m
    labels = [state.labels[j] for j in rest]
    return make_state(labels, mean, 0.5 * (cov + cov.T))


def sample_outcome(
    state: QuadratureState, mode: str, rng: np.random.Generator
) -> float:
    """
    Draw one homodyne outcome from the marginal of ``mode``.

    A zero-variance mode returns its mean without consuming randomness.
    """
    i = state.index(mode)
    mean = float(state.mean[i])
    var = float(state.cov[i, i])
    if var <= 0.0:
        return mean
    return float(rng.normal(mean, np.sqrt(var)))


def marginal(state: QuadratureState, modes: Sequence[str]) -> QuadratureState:
    """Sub-state over ``modes``, in the order given."""
    idx = state.indices(modes)
    return make_state(
        [state.labels[i] for i in idx],
        state.mean[idx],
        state.cov[np.ix_(idx, idx)],
    )


def remove_modes(state: QuadratureState, modes: Iterable[str]) -> QuadratureState:
    """Trace out ``modes``."""
    drop = set(modes)
    for label in drop:
        state.index(label)
    return marginal(state, [label for label in state.labels if label not in drop])


def append_modes(
    state: QuadratureState,
    labels: Sequence[str],
    mean: Optional[Sequence[float]] = None,
    variance: float = VACUUM_VARIANCE,
) -> QuadratureState:
    """
    Append uncorrelated modes, vacuum by default.

    Raises:
        ValueError: If any label already exists
    """
    clash = [label for label in labels if state.has(label)]
    if clash:
        raise ValueError(f"Modes already present in state: {clash}")
    k = len(labels)
    n = state.n_modes
    new_mean = np.zeros(k) if mean is None else np.asarray(mean, dtype=float).reshape(k)
    cov = np.zeros((n + k, n + k))
    cov[:n, :n] = state.cov
    cov[n:, n:] = variance * np.eye(k)
    return make_state(
        list(state.labels) + list(labels),
        np.concatenate([state.mean, new_mean]),
        cov,
    )


def append_combination(
    state: QuadratureState, weights: Mapping[str, float], label: str
) -> QuadratureState:
    """
    Append a new mode equal to a linear combination of existing modes.

    Args:
        state: Source state
        weights: Coefficient per existing label
        label: Label of the combined mode

    Returns:
        State with the combination appended as the last mode
    """
    if state.has(label):
        raise ValueError(f"Mode '{label}' already present in state")
    w = np.zeros(state.n_modes)
    for source, weight in weights.items():
        w[state.index(source)] = weight
    cw = state.cov @ w
    n = state.n_modes
    cov = np.zeros((n + 1, n + 1))
    cov[:n, :n] = state.cov
    cov[:n, n] = cw
    cov[n, :n] = cw
    cov[n, n] = float(w @ cw)
    return make_state(
        list(state.labels) + [label],
        np.append(state.mean, float(w @ state.mean)),
        cov,
    )


def rename_modes(state: QuadratureState, mapping: Mapping[str, str]) -> QuadratureState:
    """Relabel modes; labels absent from ``mapping`` keep their name."""
    for source in mapping:
        state.index(source)
    labels = [mapping.get(label, label) for label in state.labels]
    return make_state(labels, state.mean, state.cov)
