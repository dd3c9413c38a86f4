"""Deterministic seed derivation.

All randomness in the package flows from a single root seed through
splitmix64.  A child seed is obtained by folding integer path components
into the mixed root state one at a time:

    state = mix(root); for c in path: state = mix(state ^ mix(c))

where ``mix`` is the splitmix64 finalizer.  The same (root, path) always
yields the same child seed, independently of how many other streams were
derived, so per-instance / per-shard work can run in any order (or in
parallel) without changing results.
"""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def _mix(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(root: int, *path: int) -> int:
    """Child seed for the stream identified by ``path`` under ``root``."""
    state = _mix(root & _MASK)
    for component in path:
        state = _mix(state ^ _mix(component & _MASK))
    return state


def generator(root: int, *path: int) -> np.random.Generator:
    """numpy Generator seeded by ``derive_seed(root, *path)``."""
    return np.random.default_rng(derive_seed(root, *path))
