"""Seeded random streams with a portable Gaussian transform.

All randomness flows through PCG64 generators.  Gaussian draws use the
inverse normal CDF applied to 53-bit uniforms, so a dataset is a fixed
deterministic function of its seed.  Replicate seeds are derived from a
master seed by XOR with multiples of a fixed 64-bit odd constant.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
SEED_STRIDE = 0x9E3779B97F4A7C15


def derive_seed(master_seed: int, index: int) -> int:
    """Seed for derived stream ``index`` (0-based) under ``master_seed``."""
    return (master_seed ^ (((index + 1) * SEED_STRIDE) & _MASK64)) & _MASK64


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def standard_normals(rng: np.random.Generator, size) -> np.ndarray:
    """Standard normal draws via inverse-CDF of uniforms in (0, 1)."""
    u = (rng.integers(0, 1 << 53, size=size) + 0.5) * 2.0**-53
    return ndtri(u)
