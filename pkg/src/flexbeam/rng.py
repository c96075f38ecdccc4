"""Deterministic random number generation.

All randomness in the project flows through Philox (counter-based, 64-bit
seedable) generators created here, so that trials are reproducible across
runs and across worker processes.  Complex Gaussians are produced by an
explicit Box-Muller transform; each complex sample consumes exactly two
uniforms, which pins the draw sequence independent of library internals.
"""

import numpy as np


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for (seed, stream).

    Distinct streams of the same seed are statistically independent; they
    are used to decouple e.g. path sampling from CSI-error draws.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream),))
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng: np.random.Generator, size, var=1.0) -> np.ndarray:
    """Circularly-symmetric complex Gaussian samples, CN(0, var).

    Box-Muller on uniform pairs: one pair yields the real and imaginary
    parts of a single sample (each N(0, var/2)).
    """
    u1 = rng.random(size)
    u2 = rng.random(size)
    # guard against log(0); rng.random() is in [0, 1)
    u1 = np.maximum(u1, np.finfo(float).tiny)
    r = np.sqrt(-2.0 * np.log(u1))
    z = r * (np.cos(2.0 * np.pi * u2) + 1j * np.sin(2.0 * np.pi * u2))
    return np.sqrt(var / 2.0) * z
