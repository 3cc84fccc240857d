"""Counter-based SplitMix64 generator used for all instance and sampling randomness.

The i-th output (i = 1, 2, ...) of a stream with key ``s`` is ``mix(s + i * GAMMA)``
taken modulo 2**64, where::

    mix(z):
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB
        return z ^ (z >> 31)

Everything is integer arithmetic on 64-bit words, so streams are identical on every
platform and in every language that implements the same three lines.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Key for an independent sub-stream, e.g. ``derive_seed(seed, k)`` for subproblem k."""
    s = mix64(seed & MASK64)
    for key in keys:
        s = mix64(s ^ mix64((key & MASK64) + GAMMA))
    return s


class SplitMix64:
    def __init__(self, seed: int):
        self.key = seed & MASK64
        self.counter = 0

    def next_u64(self) -> int:
        self.counter += 1
        return mix64(self.key + self.counter * GAMMA)

    def random(self) -> float:
        """Uniform double in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection (no modulo bias)."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = ((1 << 64) // n) * n
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi]."""
        return lo + self.randbelow(hi - lo + 1)

    def sample(self, population_size: int, k: int) -> list[int]:
        """k distinct indices from range(population_size), via partial Fisher-Yates."""
        if not 0 <= k <= population_size:
            raise ValueError("sample size out of range")
        pool = list(range(population_size))
        for i in range(k):
            j = i + self.randbelow(population_size - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
