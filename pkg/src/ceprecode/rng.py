"""Deterministic random-stream derivation.

Every random quantity in the package is drawn from a named substream of a
single user seed, derived through ``numpy.random.SeedSequence`` spawn keys.
Stream layout used by the library:

==========  =======================  ===========================================
stream id   key shape                what it seeds
==========  =======================  ===========================================
CHANNEL     (CHANNEL, c)             channel impulse responses, realization c
SYMBOLS     (..., SYMBOLS, s)        information-symbol frame s
NOISE       (..., NOISE, ...)        receiver AWGN
INIT        (..., INIT, s)           precoder phase initialization, frame s
TRIAL       (TRIAL, c)               per-channel base for nested Monte-Carlo
==========  =======================  ===========================================

Substreams with different keys are statistically independent, and a given
(seed, key) pair reproduces the same values regardless of execution order,
thread schedule, or batching.  Keys compose: ``substream(substream(s, a), b)``
has spawn key ``(a, b)``.
"""

from __future__ import annotations

import numpy as np

CHANNEL = 0
SYMBOLS = 1
NOISE = 2
INIT = 3
TRIAL = 4

Seed = "int | np.random.SeedSequence"


def substream(seed, *key: int) -> np.random.SeedSequence:
    """Derive the named substream of ``seed`` for the given key tuple."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.SeedSequence(
            entropy=seed.entropy, spawn_key=tuple(seed.spawn_key) + tuple(key)
        )
    return np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(key))


def generator(seed, *key: int) -> np.random.Generator:
    """A ``numpy.random.Generator`` on the named substream."""
    if key:
        seed = substream(seed, *key)
    elif not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(entropy=int(seed))
    return np.random.Generator(np.random.PCG64(seed))


def complex_normal(rng: np.random.Generator, size, variance=1.0) -> np.ndarray:
    """Circularly symmetric complex Gaussian samples with total variance
    ``variance`` (real and imaginary parts each carry half)."""
    scale = np.sqrt(np.asarray(variance, dtype=float) / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))
