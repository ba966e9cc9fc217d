"""Self-contained pseudo-random generator for reproducible simulations.

Uses xoshiro256++ (Blackman & Vigna) seeded through SplitMix64, with
Box-Muller for normal deviates and inverse-transform exponentials.
The generator is implemented here rather than taken from numpy so that
seeded fixtures stay bit-identical across library upgrades.
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int):
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256:
    """xoshiro256++ stream with batch output as numpy arrays."""

    def __init__(self, seed: int):
        sm = seed & _MASK64
        state = []
        for _ in range(4):
            sm, word = _splitmix64(sm)
            state.append(word)
        self._s = state

    def next_raw(self) -> int:
        """One 64-bit output word."""
        s0, s1, s2, s3 = self._s
        result = (_rotl((s0 + s3) & _MASK64, 23) + s0) & _MASK64
        t = (s1 << 17) & _MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def _raw_array(self, n: int) -> np.ndarray:
        out = np.empty(n, dtype=np.uint64)
        next_raw = self.next_raw
        for i in range(n):
            out[i] = next_raw()
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1) with 53-bit resolution."""
        return (self._raw_array(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def standard_normals(self, n: int) -> np.ndarray:
        """n standard normal deviates (Box-Muller on uniform pairs)."""
        m = (n + 1) // 2
        u1 = 1.0 - self.uniforms(m)  # (0, 1]: keeps log() finite
        u2 = self.uniforms(m)
        radius = np.sqrt(-2.0 * np.log(u1))
        angle = (2.0 * math.pi) * u2
        z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
        return z[:n]

    def exponentials(self, n: int, rate: float) -> np.ndarray:
        """n exponential deviates with the given rate (mean 1/rate)."""
        if rate <= 0:
            raise ValueError("rate must be positive")
        return -np.log(1.0 - self.uniforms(n)) / rate
