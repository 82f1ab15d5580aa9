"""Seedable 64-bit xorshift generator.

All in-game randomness (enemy behavior, quirk draws) goes through this
generator so that (cartridge, seed, action sequence) fully determines every
byte of the RAM trace and every rendered pixel, independent of Python's
process-level RNG state.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_SPLITMIX_GAMMA = 0x9E3779B97F4A7C15


def _splitmix64(x: int) -> int:
    x = (x + _SPLITMIX_GAMMA) & _MASK
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Xorshift64:
    """xorshift64* with a splitmix-scrambled seed (seed 0 is fine)."""

    __slots__ = ("state",)

    def __init__(self, seed: int) -> None:
        self.state = _splitmix64(seed & _MASK) or 0x1ABCDEF123456789

    def next_u64(self) -> int:
        x = self.state
        x ^= (x >> 12)
        x ^= (x << 25) & _MASK
        x ^= (x >> 27)
        self.state = x
        return (x * 0x2545F4914F6CDD1D) & _MASK

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] (modulo bias negligible at these ranges)."""
        return lo + self.next_u64() % (hi - lo + 1)

    def chance(self, num: int, den: int) -> bool:
        """True with probability num/den."""
        return self.next_u64() % den < num

    def getstate(self) -> int:
        return self.state

    def setstate(self, state: int) -> None:
        self.state = state


def derive_seed(base_seed: int, stream: int) -> int:
    """Independent sub-seed for a named stream (episode index, agent, ...)."""
    return _splitmix64((base_seed & _MASK) ^ _splitmix64(stream & _MASK))
