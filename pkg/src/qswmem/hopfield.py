"""Classical Hopfield reference model.

One-shot Hebbian storage, quadratic energy, asynchronous sign updates with
the sign(0)-keeps-current convention, and retrieval by sweeping to a fixed
point.  Serves as the classical baseline the walk's sink preference is
compared against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonConvergenceError
from .network import BinaryPattern, as_pattern, hamming


@dataclass(frozen=True)
class HopfieldNetwork:
    weights: np.ndarray
    stored: tuple[BinaryPattern, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionError(f"weights must be square, got {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("weights must be exactly symmetric")
        if np.any(np.diagonal(w) != 0):
            raise ValueError("weight diagonal must be exactly zero")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def size(self) -> int:
        return self.weights.shape[0]


def hebbian_store(patterns) -> HopfieldNetwork:
    """w_ij = (1/m) sum_p s_i s_j off the diagonal, spins in {-1, +1}."""
    patterns = [as_pattern(p) for p in patterns]
    if not patterns:
        raise ValueError("need at least one pattern to store")
    m = len(patterns[0])
    if any(len(p) != m for p in patterns):
        raise DimensionError("stored patterns must share one length")
    w = np.zeros((m, m))
    for p in patterns:
        s = p.spins()
        w += np.outer(s, s)
    w /= m
    np.fill_diagonal(w, 0.0)
    return HopfieldNetwork(weights=w, stored=tuple(patterns))


def energy(net: HopfieldNetwork, state) -> float:
    """E = -1/2 sum_{i != j} w_ij s_i s_j."""
    state = as_pattern(state)
    if len(state) != net.size:
        raise DimensionError(
            f"state length {len(state)} != network size {net.size}"
        )
    s = state.spins()
    return float(-0.5 * s @ net.weights @ s)


def update_async(net: HopfieldNetwork, state, order=None) -> BinaryPattern:
    """One full asynchronous sweep: each neuron in turn takes the sign of its
    local field, keeping its value on a zero field.  Never increases energy."""
    state = as_pattern(state)
    if len(state) != net.size:
        raise DimensionError(
            f"state length {len(state)} != network size {net.size}"
        )
    if order is None:
        order = range(net.size)
    order = list(order)
    if sorted(order) != list(range(net.size)):
        raise ValueError("order must be a permutation of all neuron indices")
    s = state.spins()
    for i in order:
        local = float(net.weights[i] @ s)
        if local != 0.0:
            s[i] = 1.0 if local > 0 else -1.0
    return BinaryPattern((s > 0).astype(int))


def retrieve(net: HopfieldNetwork, initial, max_sweeps: int = 100,
             order=None) -> tuple[BinaryPattern, int]:
    """Sweep until a full pass changes nothing; returns (fixed point, sweeps).

    The confirming sweep counts, so a stored pattern retrieves in one sweep.
    """
    if max_sweeps < 1:
        raise ValueError("max_sweeps must be >= 1")
    state = as_pattern(initial)
    for sweep in range(1, max_sweeps + 1):
        updated = update_async(net, state, order=order)
        if updated == state:
            return state, sweep
        state = updated
    raise NonConvergenceError(
        f"no fixed point within {max_sweeps} sweeps",
        last_state=state, sweeps=max_sweeps,
    )


def nearest_stored(patterns, state) -> set[BinaryPattern]:
    """Stored pattern(s) at minimal Hamming distance; ties come back as a set."""
    patterns = [as_pattern(p) for p in patterns]
    if not patterns:
        raise ValueError("pattern list is empty")
    state = as_pattern(state)
    distances = [hamming(p, state) for p in patterns]
    best = min(distances)
    return {p for p, d in zip(patterns, distances) if d == best}
