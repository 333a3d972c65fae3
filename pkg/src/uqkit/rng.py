"""Portable seeded pseudo-random generator.

Every stochastic piece of the toolkit (synthetic data, weight init, batch
shuffling) draws from this generator so that a seed pins down results
bit-for-bit, independent of numpy version or platform. The core stream is
xoshiro256** (Blackman & Vigna), seeded through SplitMix64; derived draws
use fixed textbook algorithms:

- uniform doubles: 53 high bits of the stream divided by 2**53
- normals: Box-Muller transform (pair-cached)
- gamma: Marsaglia-Tsang squeeze method, with the standard shape<1 boost
- beta: ratio of two gamma draws
- integers below a bound: rejection on the high bits (unbiased)
"""

from __future__ import annotations

import math

_MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64(state: int) -> tuple[int, int]:
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31), state


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class PortableRng:
    """xoshiro256** stream with uniform/normal/gamma/beta draws.

    Instances are cheap; create one per independent task from an integer
    seed. Never share an instance across logically independent pipelines,
    or their streams interleave.
    """

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            word, state = _splitmix64(state)
            s.append(word)
        self._s = s
        self._spare_normal: float | None = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        """Uniform double in [0, 1)."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randint(self, bound: int) -> int:
        """Uniform integer in [0, bound), unbiased via rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        nbits = max(bound - 1, 1).bit_length()
        while True:
            value = self.next_u64() >> (64 - nbits)
            if value < bound:
                return value

    def normal(self, mean: float = 0.0, std: float = 1.0) -> float:
        """Gaussian draw via the Box-Muller transform."""
        if self._spare_normal is not None:
            z = self._spare_normal
            self._spare_normal = None
        else:
            u1 = self.random()
            while u1 <= 0.0:
                u1 = self.random()
            u2 = self.random()
            radius = math.sqrt(-2.0 * math.log(u1))
            z = radius * math.cos(2.0 * math.pi * u2)
            self._spare_normal = radius * math.sin(2.0 * math.pi * u2)
        return mean + std * z

    def gamma(self, shape: float) -> float:
        """Gamma(shape, 1) via Marsaglia-Tsang."""
        if shape <= 0.0:
            raise ValueError("gamma shape must be positive")
        if shape < 1.0:
            # boost: Gamma(a) = Gamma(a+1) * U^(1/a)
            u = self.random()
            while u <= 0.0:
                u = self.random()
            return self.gamma(shape + 1.0) * u ** (1.0 / shape)
        d = shape - 1.0 / 3.0
        c = 1.0 / math.sqrt(9.0 * d)
        while True:
            x = self.normal()
            v = 1.0 + c * x
            if v <= 0.0:
                continue
            v = v * v * v
            u = self.random()
            if u < 1.0 - 0.0331 * x * x * x * x:
                return d * v
            if u > 0.0 and math.log(u) < 0.5 * x * x + d * (1.0 - v + math.log(v)):
                return d * v

    def beta(self, alpha: float, beta_param: float) -> float:
        if alpha <= 0.0 or beta_param <= 0.0:
            raise ValueError("beta parameters must be positive")
        x = self.gamma(alpha)
        y = self.gamma(beta_param)
        return x / (x + y)

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randint(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        order = list(range(n))
        self.shuffle(order)
        return order
