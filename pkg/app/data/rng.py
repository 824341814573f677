"""
Seeded random stream.

The generator is numpy's PCG64 seeded through ``SeedSequence([seed, stream])``;
both algorithms are fixed and platform independent, so a seed reproduces the
same draws everywhere. ``stream`` separates independent draws that share a seed.
"""

from __future__ import annotations

import numpy as np

from app.model.checkpoint_schema import RngState


class Rng:
    def __init__(self, seed: int, stream: int = 0):
        if seed < 0 or stream < 0:
            raise ValueError("seed and stream must be non-negative")
        self.seed = seed
        self._bit_generator = np.random.PCG64(np.random.SeedSequence([seed, stream]))
        self._generator = np.random.Generator(self._bit_generator)

    def normal(self, size: int | tuple[int, ...]) -> np.ndarray:
        return self._generator.standard_normal(size)

    def uniform(self, low: float, high: float, size: int | tuple[int, ...]) -> np.ndarray:
        return self._generator.uniform(low, high, size)

    def integers(self, high: int, size: int) -> np.ndarray:
        return self._generator.integers(0, high, size)

    def permutation(self, n: int) -> np.ndarray:
        return self._generator.permutation(n)

    def get_state(self) -> RngState:
        raw = self._bit_generator.state
        return RngState(
            seed=self.seed,
            state=raw["state"]["state"],
            inc=raw["state"]["inc"],
            has_uint32=raw["has_uint32"],
            uinteger=raw["uinteger"],
        )

    def set_state(self, state: RngState) -> None:
        self.seed = state.seed
        self._bit_generator.state = {
            "bit_generator": "PCG64",
            "state": {"state": state.state, "inc": state.inc},
            "has_uint32": state.has_uint32,
            "uinteger": state.uinteger,
        }
