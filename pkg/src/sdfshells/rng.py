"""Stateless counter-based random numbers.

Jitter for sampling is keyed by (seed, pixel, stage, index) so renders are
bit-identical regardless of tiling or evaluation order.  Mixing is the
splitmix64 finalizer applied per key.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    # uint64 wraparound is the point here
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
        return z ^ (z >> np.uint64(31))


def hash_u64(*keys) -> np.ndarray:
    """Combine integer keys (scalars or broadcastable arrays) into uint64 hashes."""
    h = _mix(_GAMMA)
    with np.errstate(over="ignore"):
        for k in keys:
            k = np.asarray(k)
            if k.dtype.kind not in "iu":
                raise TypeError("keys must be integers")
            h = _mix(h ^ (k.astype(np.uint64) + _GAMMA))
    return h


def stateless_uniform(*keys) -> np.ndarray:
    """Uniform floats in [0, 1) determined entirely by the keys."""
    return (hash_u64(*keys) >> np.uint64(11)).astype(np.float64) * (2.0**-53)
