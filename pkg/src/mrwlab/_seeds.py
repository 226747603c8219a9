"""Deterministic 64-bit seed derivation for campaigns.

Per-trial seeds are a pure function of (master seed, trial index), so a
campaign's output is independent of how trials are sharded across workers.
The mixing function is fixed: it is the splitmix64 finalizer applied to
``master + (index + 1) * GOLDEN`` in 64-bit wrapping arithmetic.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(z: int) -> int:
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return (z ^ (z >> 31)) & MASK64


def trial_seed(master_seed: int, trial_index: int) -> int:
    """Seed for trial ``trial_index`` of a campaign with the given master seed."""
    if trial_index < 0:
        raise ValueError("trial_index must be >= 0")
    base = (master_seed & MASK64) + (trial_index + 1) * GOLDEN
    return splitmix64(base & MASK64)
