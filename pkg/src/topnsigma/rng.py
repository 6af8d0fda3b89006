"""Seedable 64-bit random stream used for all token draws.

The generator is SplitMix64 (Steele, Lea & Flood, OOPSLA 2014; the seeding
engine of Vigna's xoshiro family).  It was chosen because its state advances
by a fixed odd constant, so the k-th output is a pure function of
``seed + k * GAMMA``: the same stream can be produced one value at a time or
as a vectorized block, and it is trivial to reimplement bit-for-bit in any
language that has 64-bit integer arithmetic.  Every uniform is derived from
one 64-bit output as ``(x >> 11) * 2**-53``, i.e. 53 random mantissa bits in
[0, 1).
"""

from __future__ import annotations

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_U53 = float(2**-53)


def _mix(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


class RngState:
    """Mutable SplitMix64 state; one instance per thread of execution."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK64

    def copy(self) -> "RngState":
        c = RngState(0)
        c._state = self._state
        return c

    def next_uint64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix(self._state)

    def next_uniform(self) -> float:
        """One double in [0, 1) from the top 53 bits of the next output."""
        return (self.next_uint64() >> 11) * _U53

    def uniforms(self, n: int) -> np.ndarray:
        """Vectorized block of the next ``n`` uniforms, identical to ``n``
        successive :meth:`next_uniform` calls."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        steps = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(self._state) + steps * np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        z = z ^ (z >> np.uint64(31))
        self._state = (self._state + n * _GAMMA) & _MASK64
        return (z >> np.uint64(11)).astype(np.float64) * _U53

    def __repr__(self) -> str:
        return f"RngState(state=0x{self._state:016x})"


def derive_seed(base: int, *indices: int) -> int:
    """Deterministically fold indices into a base seed (SplitMix64 mixing),
    giving well-separated per-worker/per-cell seeds."""
    z = int(base) & _MASK64
    for ix in indices:
        z = _mix((z + _GAMMA + (int(ix) & _MASK64)) & _MASK64)
    return z
