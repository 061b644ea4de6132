"""Deterministic 64-bit seeding and shuffling.

Every randomized artifact in this toolkit (mixture plans, generation
manifests, conditioning draws) derives from the fixed generator specified
here, so identical arguments produce byte-identical outputs on any
platform, Python build, or thread count. The generator identity is part of
the serialized file contracts and must not change without a version bump.

Generator identity: "splitmix64-keysort-v1"

  splitmix64(x):
    x <- (x + 0x9E3779B97F4A7C15) mod 2^64
    z <- x
    z <- ((z xor (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2^64
    z <- ((z xor (z >> 27)) * 0x94D049BB133111EB) mod 2^64
    return z xor (z >> 31)

  mix64(p1, ..., pn):
    acc <- 0
    for each p: acc <- splitmix64(acc xor (p mod 2^64))
    return acc

  permutation(n, seed):
    key[i] <- splitmix64(splitmix64(seed) xor i)   for i in 0..n-1
    return indices 0..n-1 sorted ascending by (key[i], i)

The key-sort shuffle is used instead of Fisher-Yates so it can be computed
with vectorized unsigned arithmetic; ties on key collide with probability
about n^2 / 2^65 and are broken by index, so the result is still total and
deterministic.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

GENERATOR_ID = "splitmix64-keysort-v1"

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64(x: int) -> int:
    """One SplitMix64 output step (Steele, Lea, Flood 2014 constants)."""
    x = (x + _GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def mix64(*parts: int) -> int:
    """Fold integer parts left to right into one 64-bit value.

    Negative parts are reduced mod 2^64 first, so any Python int is
    accepted. Order matters: mix64(a, b) != mix64(b, a) in general.
    """
    acc = 0
    for p in parts:
        acc = splitmix64(acc ^ (p & MASK64))
    return acc


def splitmix64_array(x: np.ndarray) -> np.ndarray:
    """Vectorized splitmix64 over a uint64 array. Bit-identical to the
    scalar form; uint64 wraparound supplies the mod 2^64."""
    x = x.astype(np.uint64, copy=True)
    x += np.uint64(_GAMMA)
    x ^= x >> np.uint64(30)
    x *= np.uint64(_MIX1)
    x ^= x >> np.uint64(27)
    x *= np.uint64(_MIX2)
    x ^= x >> np.uint64(31)
    return x


def derived_seeds(seed: int, lane: int, count: int) -> np.ndarray:
    """Vector of mix64(seed, lane, i) for i in 0..count-1, as uint64.

    Identical to calling mix64 in a loop; the fold prefix over (seed, lane)
    is hoisted out and the last step runs vectorized.
    """
    pre = np.uint64(mix64(seed, lane))
    idx = np.arange(count, dtype=np.uint64)
    return splitmix64_array(pre ^ idx)


def permutation(n: int, seed: int) -> np.ndarray:
    """Deterministic permutation of range(n) for a 64-bit seed."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    pre = np.uint64(splitmix64(seed & MASK64))
    keys = splitmix64_array(pre ^ np.arange(n, dtype=np.uint64))
    return np.argsort(keys, kind="stable")
