"""Deterministic pseudo-random streams built on SplitMix64.

SplitMix64 (Steele, Lea & Flood's mixing of the Weyl sequence with constant
0x9E3779B97F4A7C15) is used in counter mode: the i-th draw from a stream is
mix64(seed + (i + 1) * GAMMA), so streams are stateless, vectorizable, and
independent draws can be generated in any order.  Derived seeds for
sub-streams (replicates, per-model seeds) fold a tag into the state with a
second mixing round so sibling streams do not overlap.
"""

from __future__ import annotations

import numpy as np

__all__ = ["mix64", "stream", "derive_seed", "uniform_thresholds_index"]

_MASK = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_TAG = 0xD1B54A32D192ED03


def mix64(x: int) -> int:
    """Finalizer of SplitMix64 on a 64-bit integer."""
    x &= _MASK
    x = ((x ^ (x >> 30)) * _MIX1) & _MASK
    x = ((x ^ (x >> 27)) * _MIX2) & _MASK
    return x ^ (x >> 31)


def stream(seed: int, n: int, offset: int = 0) -> np.ndarray:
    """Draws offset..offset+n-1 of the stream for `seed`, as uint64."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    idx = np.arange(offset + 1, offset + n + 1, dtype=np.uint64)
    x = (np.uint64(seed & _MASK) + idx * np.uint64(GAMMA)).astype(np.uint64)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return x


def derive_seed(seed: int, *tags: int) -> int:
    """Stable sub-stream seed: folds each tag in with an extra mixing round."""
    state = mix64(seed)
    for t in tags:
        state = mix64(state ^ mix64((t * _TAG) & _MASK))
    return state


def uniform_thresholds_index(thresholds: np.ndarray, seed: int, n: int) -> np.ndarray:
    """Inverse-CDF lookup: index of the cell each uniform draw lands in.

    `thresholds` holds ceil(cdf_k * 2**64) as uint64 for every cell except
    the last (whose threshold would be 2**64).  With u = z / 2**64 for a
    stream draw z, the returned index is the smallest k with u < cdf_k,
    which is an exact inverse-CDF over the dyadic uniform; draws beyond the
    final listed threshold fall into the last cell.
    """
    z = stream(seed, n)
    return np.searchsorted(thresholds, z, side="right")
