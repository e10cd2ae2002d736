"""Platform-stable 64-bit PRNG shared by Python code and the compiled kernels.

The generator is SplitMix64 (Steele, Lea & Flood 2014)::

    state += 0x9E3779B97F4A7C15
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB
    return z ^ (z >> 31)

All arithmetic is modulo 2**64. Floats are ``(next_u64() >> 11) * 2**-53``,
which gives a uniform value in [0, 1). The state is a single ``uint64``
held in a one-element numpy array, so compiled kernels can advance the same
stream in place.

Derived seeds (Monte-Carlo samples, per-instance seeds) use
:func:`mix_seed`, which runs the SplitMix64 finaliser over
``seed + (index + 1) * 0x9E3779B97F4A7C15``.
"""

from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

# numba promotes mixed uint64/int64 arithmetic to float64, so every
# constant used in the kernels is pinned to uint64.
_U_GOLDEN = np.uint64(GOLDEN)
_U_MUL1 = np.uint64(_MUL1)
_U_MUL2 = np.uint64(_MUL2)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)
_U11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def mix_seed(seed: int, index: int) -> int:
    """Derive an independent 64-bit seed for sub-stream ``index``."""
    return _finalize((seed + (index + 1) * GOLDEN) & MASK64)


@njit(cache=True)
def next_u64(state):
    s = state[0] + _U_GOLDEN
    state[0] = s
    z = (s ^ (s >> _U30)) * _U_MUL1
    z = (z ^ (z >> _U27)) * _U_MUL2
    return z ^ (z >> _U31)


@njit(cache=True)
def next_float(state):
    return np.float64(next_u64(state) >> _U11) * _INV53


class Rng:
    """Seeded SplitMix64 stream.

    The same object can be handed to compiled kernels (via :attr:`state`)
    and used from Python; both advance one shared state.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int = 0) -> None:
        self.state = np.array([seed & MASK64], dtype=np.uint64)

    def next_u64(self) -> int:
        s = (int(self.state[0]) + GOLDEN) & MASK64
        self.state[0] = s
        return _finalize(s)

    def random(self) -> float:
        return (self.next_u64() >> 11) * _INV53

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)`` by rejection (no modulo bias)."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % bound

    def spawn(self, index: int) -> "Rng":
        """Independent child stream keyed by ``index``; does not advance self."""
        return Rng(mix_seed(int(self.state[0]), index))

    def sample_without_replacement(self, population: int, k: int) -> np.ndarray:
        """First ``k`` entries of a partial Fisher-Yates shuffle of ``range(population)``."""
        if k > population:
            raise ValueError(f"cannot sample {k} items from {population}")
        pool = list(range(population))
        for i in range(k):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return np.array(pool[:k], dtype=np.int32)
