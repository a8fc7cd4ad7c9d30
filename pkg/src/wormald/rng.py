"""Deterministic random streams.

All randomness in the package flows through counter-based Philox generators
keyed by 64-bit seeds.  Independent streams (per run, per trial) derive their
keys from a master seed with a splitmix64-style mixing function:

    seed_i = mix64(master XOR ((i + 1) * 0x9E3779B97F4A7C15 mod 2^64))

``mix64`` is the splitmix64 finalizer.  Both the multiply-by-odd-constant
steps and the xor-shift steps are bijections on 64-bit words, so distinct
indices always yield distinct derived seeds for a fixed master seed.  The
scheme is fixed: identical (master, index) pairs give identical streams on
every platform.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1

#: Odd constant used by the splitmix64 sequence (2^64 / golden ratio).
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """splitmix64 finalizer: a fixed bijective mixing of a 64-bit word."""
    x &= _MASK64
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(master_seed: int, index: int) -> int:
    """Derive the seed for independent stream ``index`` from ``master_seed``.

    Bijective in ``index`` for fixed master seed, so distinct indices never
    collide.  Negative master seeds are reduced mod 2^64.
    """
    if index < 0:
        raise ValueError(f"stream index must be non-negative, got {index}")
    return mix64((master_seed & _MASK64) ^ ((index + 1) * GOLDEN_GAMMA & _MASK64))


def make_generator(seed: int) -> np.random.Generator:
    """A Philox generator keyed by a 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=seed & _MASK64))


def spawn(master_seed: int, index: int) -> np.random.Generator:
    """Generator for independent stream ``index`` under ``master_seed``."""
    return make_generator(derive_seed(master_seed, index))
