"""Portable, seedable random number generation.

The harness needs reproducible instances across machines and across
reimplementations, so instead of relying on a framework default we pin a
named generator: SplitMix64 (Steele, Lea & Flood, 2014). Its state after k
draws is ``seed + (k+1) * GOLDEN mod 2**64``, which makes the whole stream a
pure function of (seed, draw index) and lets us vectorize it with uint64
arithmetic.

Uniforms take the top 53 bits of each output; normal variates are produced
by the Box-Muller transform on consecutive uniform pairs.
"""

import numpy as np

_MASK64 = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix(x):
    """SplitMix64 output function applied elementwise to a uint64 array."""
    with np.errstate(over="ignore"):
        z = x.copy()
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        z ^= z >> np.uint64(31)
    return z


class SplitMix64:
    """SplitMix64 stream with an explicit draw counter.

    ``next_uint64(n)`` returns outputs for counters ``c, c+1, ..., c+n-1``
    and advances the counter, exactly matching the sequential algorithm
    ``state += GOLDEN; return mix(state)``.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self._count = 0

    def next_uint64(self, n: int) -> np.ndarray:
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        with np.errstate(over="ignore"):
            state = np.uint64(self.seed) + idx * np.uint64(_GOLDEN)
        return _mix(state)

    def uniform(self, n: int) -> np.ndarray:
        """n doubles in [0, 1) using the top 53 bits of each output."""
        bits = self.next_uint64(n) >> np.uint64(11)
        return bits.astype(np.float64) * (2.0 ** -53)

    def normal(self, n: int) -> np.ndarray:
        """n standard normal doubles via Box-Muller.

        Consumes 2*ceil(n/2) raw outputs. The first uniform of each pair is
        shifted into (0, 1] so log() is always finite.
        """
        pairs = (n + 1) // 2
        raw = self.next_uint64(2 * pairs) >> np.uint64(11)
        u = raw.astype(np.float64)
        u1 = (u[:pairs] + 1.0) * (2.0 ** -53)
        u2 = u[pairs:] * (2.0 ** -53)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * np.pi) * u2
        out = np.empty(2 * pairs)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:n]
