"""Seed derivation and generator construction.

Every stochastic routine takes an explicit 64-bit seed. Pipeline tasks derive
theirs from the master seed with :func:`derive_seed`, so results never depend
on scheduling order.
"""
import numpy as np

MASK64 = (1 << 64) - 1

# purpose tags
SEGMENT_KMEANS = 1
GROUP_KMEANS = 2
GROUP_GMM = 3
LOO_FOLD = 4
WHITE_NOISE = 5
SYNTH = 6


def splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, stage_id: int, subject_index: int, roi_index: int,
                purpose_tag: int) -> int:
    h = splitmix64(int(master_seed) & MASK64)
    for part in (stage_id, subject_index, roi_index, purpose_tag):
        h = splitmix64(h ^ (int(part) & MASK64))
    return h


def sub_seed(seed: int, *parts: int) -> int:
    """Child seed of ``seed`` for an indexed sub-task (restart, k value, ...)."""
    h = splitmix64(int(seed) & MASK64)
    for p in parts:
        h = splitmix64(h ^ (int(p) & MASK64))
    return h


def rng(seed: int) -> np.random.Generator:
    """Philox (counter-based, 64-bit keyed) generator for ``seed``."""
    return np.random.Generator(np.random.Philox(int(seed) & MASK64))
