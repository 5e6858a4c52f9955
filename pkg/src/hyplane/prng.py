"""Counter-based splitmix64 streams for reproducible sampling.

Every random quantity in this package (noise grids, decoder weights,
Monte-Carlo directions) is derived from splitmix64 evaluated at an explicit
counter index.  Random access by counter makes chunked and multi-threaded
sampling loops produce bit-identical results no matter how the work is
partitioned, and the generator itself is plain 64-bit integer arithmetic,
so streams are stable across platforms and numpy versions.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

_U53_SCALE = 2.0 ** -53


def u64_at(seed: int, indices: np.ndarray) -> np.ndarray:
    """splitmix64 outputs at the given counter positions.

    Index ``i`` yields the (i+1)-th output of a splitmix64 generator seeded
    with ``seed``, matching the published reference sequence.
    """
    x = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + (
        np.asarray(indices, dtype=np.uint64) + np.uint64(1)
    ) * _GOLDEN
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def uniform01(seed: int, start: int, count: int, stride: int = 1, offset: int = 0) -> np.ndarray:
    """Uniform floats in [0, 1) from counters start+offset, start+offset+stride, ..."""
    idx = np.arange(start, start + count, dtype=np.uint64) * np.uint64(stride) + np.uint64(offset)
    return (u64_at(seed, idx) >> np.uint64(11)).astype(np.float64) * _U53_SCALE


def uniform_sym(seed: int, start: int, count: int, stride: int = 1, offset: int = 0) -> np.ndarray:
    """Uniform floats in [-1, 1)."""
    return 2.0 * uniform01(seed, start, count, stride, offset) - 1.0


def normal(seed: int, start: int, count: int) -> np.ndarray:
    """Standard normals via Box-Muller; sample k consumes counters 2k and 2k+1."""
    u1 = uniform01(seed, start, count, stride=2, offset=0)
    u2 = uniform01(seed, start, count, stride=2, offset=1)
    # shift u1 into (0, 1] so the log never sees zero
    r = np.sqrt(-2.0 * np.log(1.0 - u1))
    return r * np.cos(2.0 * np.pi * u2)


def sphere_directions(seed: int, start: int, count: int) -> tuple[np.ndarray, np.ndarray]:
    """Area-uniform directions via inverse CDF; sample k consumes counters 2k, 2k+1.

    Returns (colatitude in [0, pi], longitude in (-pi, pi]).
    """
    u1 = uniform01(seed, start, count, stride=2, offset=0)
    u2 = uniform01(seed, start, count, stride=2, offset=1)
    theta = np.arccos(1.0 - 2.0 * u1)
    phi = np.pi * (1.0 - 2.0 * u2)
    return theta, phi
