"""
gaussian
========

Labeled multimode Gaussian states and the operations the simulator builds on.

Functions:
    make_state: Validate and build a state
    apply_channel: Push a state through an affine Gaussian channel
    condition_on_outcome: Homodyne conditioning on one quadrature
    sample_outcome: Draw a homodyne outcome
    marginal: Restrict to a subset of modes

Example:
    >>> from gaussian import make_state, condition_on_outcome
    >>> state = make_state(["a", "b"], [0.0, 0.0], [[0.5, 0.25], [0.25, 0.5]])
    >>> condition_on_outcome(state, "a", 1.0).mean_of("b")
    0.5
"""

from gaussian.state import (
    VACUUM_VARIANCE,
    AffineChannel,
    QuadratureState,
    StateValidationError,
    append_combination,
    append_modes,
    apply_channel,
    condition_on_outcome,
    embed_channel,
    make_state,
    marginal,
    remove_modes,
    rename_modes,
    sample_outcome,
    vacuum_state,
)

__all__ = [
    "VACUUM_VARIANCE",
    "AffineChannel",
    "QuadratureState",
    "StateValidationError",
    "append_combination",
    "append_modes",
    "apply_channel",
    "condition_on_outcome",
    "embed_channel",
    "make_state",
    "marginal",
    "remove_modes",
    "rename_modes",
    "sample_outcome",
    "vacuum_state",
]
