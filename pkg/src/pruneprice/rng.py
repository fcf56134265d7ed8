"""Counter-based 64-bit random stream (SplitMix64).

Every random choice in the package is a pure function of ``(seed, counter)``,
so results do not depend on call order, thread scheduling, or platform.  The
same mixing function is compiled into the Monte-Carlo kernel, which is what
lets the kernel reproduce :func:`pruneprice.mechanisms.run` bit for bit.
"""

from __future__ import annotations

from fractions import Fraction

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15
TWO64 = 1 << 64


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def word(seed: int, index: int) -> int:
    """The ``index``-th 64-bit output of the stream keyed by ``seed``."""
    return mix64(seed + (index + 1) * GAMMA)


def derive_seed(master: int, counter: int) -> int:
    """Independent child seed for trial ``counter`` of a master seed."""
    return word(master ^ 0x5851F42D4C957F2D, counter)


def unit_fraction(w: int) -> Fraction:
    """Exact ``w / 2**64`` in ``[0, 1)``."""
    return Fraction(w, TWO64)


def below(seed: int, index: int, bound: int) -> int:
    """Integer in ``[0, bound)`` from one stream word (multiply-shift)."""
    if bound <= 0:
        raise ValueError("bound must be positive")
    return (word(seed, index) * bound) >> 64
