"""Seeded counter-based pseudo-random numbers for reproducible data generation.

Golden tests require byte-identical output across runs and platforms, so
no platform RNG is used anywhere: a splitmix64 counter hash provides the
uniform stream and Box-Muller turns pairs of uniforms into gaussians.
"""

from __future__ import annotations

import hashlib
import math

_M64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _M64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _M64
    return z ^ (z >> 31)


def derive_seed(*parts) -> int:
    """Stable 64-bit seed from arbitrary string/int parts (SHA-256 based)."""
    key = "\x1f".join(str(p) for p in parts).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "big")


class CounterRng:
    """splitmix64 stream with Box-Muller gaussians."""

    def __init__(self, seed: int):
        self._state = seed & _M64
        self._spare: float | None = None

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _M64
        return _mix(self._state)

    def uniform(self) -> float:
        """Uniform in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        """Uniform integer in [0, n)."""
        return self.next_u64() % n

    def gauss(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        # u1 in (0, 1] so the log is finite
        u1 = (self.next_u64() + 1) * (1.0 / (1 << 64))
        u2 = self.uniform()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(2.0 * math.pi * u2)
        return r * math.cos(2.0 * math.pi * u2)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]
