"""Deterministic seed derivation.

Every stochastic routine takes one master seed and derives independent
child seeds for its sub-tasks (per run, per sweep point, per RNG stream)
by folding small integer path components through splitmix64.  The same
master seed therefore reproduces a whole experiment bit-for-bit, on any
platform, regardless of how many workers execute it.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


def splitmix64(x: int) -> int:
    """One splitmix64 output step (Steele et al.); a 64-bit mixing bijection."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(master: int, *path: int) -> int:
    """Mix integer path components into a child seed.

    Distinct paths give (with overwhelming probability) unrelated seeds;
    an empty path returns a mixed form of the master itself.
    """
    x = splitmix64(master & _MASK)
    for component in path:
        x = splitmix64((x + (component & _MASK)) & _MASK)
    return x
