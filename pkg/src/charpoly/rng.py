"""Reproducible random streams keyed by (seed, stream_id)."""

from __future__ import annotations

import numbers

import numpy as np


class RngStream:
    """A PCG64DXSM generator keyed by ``(seed, stream_id)``.

    The stream id enters the SeedSequence spawn key, so distinct ids give
    independent substreams and the same pair always replays the same
    variates.  A stream is meant to be owned by one worker at a time.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        if seed < 0 or stream_id < 0:
            raise ValueError("seed and stream_id must be non-negative")
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_id = int(stream_id) & 0xFFFFFFFFFFFFFFFF
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,))
        self.generator = np.random.Generator(np.random.PCG64DXSM(ss))

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def __getattr__(self, name):
        # random(), standard_normal(), ... go straight to the generator
        if name == "generator":
            raise AttributeError(name)
        return getattr(self.generator, name)


def as_generator(rng=None) -> np.random.Generator:
    """Turn None, an int seed, an RngStream or a Generator into a Generator."""
    if rng is None:
        return np.random.default_rng()
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, numbers.Integral):
        return RngStream(int(rng)).generator
    raise TypeError(f"cannot use {rng!r} as a random generator")


def provenance(rng) -> tuple[int | None, int | None]:
    if isinstance(rng, RngStream):
        return rng.seed, rng.stream_id
    if isinstance(rng, numbers.Integral):
        return int(rng), 0
    return None, None
