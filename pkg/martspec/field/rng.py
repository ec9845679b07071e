"""
Module for seeded random streams.

A stream is identified by a (seed, stream id) pair. The bit generator is
numpy's PCG64 seeded by SeedSequence(seed, spawn_key=(stream_id,)), so
distinct stream ids draw from independent states. Gaussian variates come
from numpy's ziggurat sampler (Generator.standard_normal); streams are
bit-reproducible for a fixed numpy version, which is pinned in
requirements.txt.
"""

from __future__ import annotations

import numpy as np

# stream ids at or above this offset are reserved for internal calibration
CALIBRATION_STREAM_OFFSET = 2**62


class RngStream:
    """A reproducible random stream identified by (seed, stream id)."""

    seed: int
    stream_id: int
    generator: np.random.Generator

    def __init__(self, seed: int, stream_id: int = 0) -> None:
        if not 0 <= seed < 2**64:
            raise ValueError("Seed must be a 64-bit unsigned integer.")
        if not 0 <= stream_id < 2**64:
            raise ValueError("Stream id must be a 64-bit unsigned integer.")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        seq = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64(seq))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def spawn(self, stream_id: int) -> RngStream:
        """A fresh stream with the same seed and a different stream id."""
        return RngStream(self.seed, stream_id)

    def standard_normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        """Draws i.i.d. N(0, 1) variates."""
        return self.generator.standard_normal(size)

    def uniform(
        self, low: float, high: float, size: int | tuple[int, ...]
    ) -> np.ndarray:
        """Draws i.i.d. uniform variates on [low, high)."""
        return self.generator.uniform(low, high, size)
