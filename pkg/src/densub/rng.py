"""Seed derivation helpers.

All randomized operations take 64-bit integer seeds.  Per-trial seeds are
derived by hashing the master seed together with the trial coordinates, so
grid cells can be computed in any order (or in parallel) without changing
the streams.  The Philox bit generator is counter-based, which keeps
sampling bit-reproducible across platforms.
"""

from __future__ import annotations

import numpy as np


def derive_seed(master_seed: int, *coords: int) -> int:
    """Hash a master seed and integer coordinates into a fresh 64-bit seed."""
    entropy = [int(master_seed) & 0xFFFFFFFFFFFFFFFF]
    entropy.extend(int(c) & 0xFFFFFFFFFFFFFFFF for c in coords)
    ss = np.random.SeedSequence(entropy=entropy)
    return int(ss.generate_state(1, np.uint64)[0])


def make_rng(seed: int, *coords: int) -> np.random.Generator:
    """Counter-based generator for the given seed/coordinate tuple."""
    return np.random.Generator(np.random.Philox(key=derive_seed(seed, *coords)))
