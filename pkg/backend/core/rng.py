"""
Deterministic random streams.

All randomness in the project goes through Philox, numpy's counter-based
bit generator. A stream is identified by a 64-bit seed plus an optional
tuple of integers (episode index, epoch, purpose tag), so any component can
derive an independent, reproducible stream without sharing mutable state.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np


# Stream purpose tags (second element of the stream key)
STREAM_INIT = 1
STREAM_REPLAY = 2
STREAM_SPLIT = 3
STREAM_EPISODE = 4
STREAM_EVALUATION = 5


@dataclass(frozen=True)
class RngState:
    """
    Seed and stream key of a Philox generator.

    Identical (seed, stream) pairs produce identical draw sequences on every
    platform; the counter lives inside the generator returned by
    ``generator()``.
    """

    seed: int
    stream: Tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= int(self.seed) < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")

    def child(self, *key: int) -> "RngState":
        """Derive a sub-stream, e.g. ``state.child(STREAM_EPISODE, index)``."""
        return RngState(self.seed, self.stream + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        entropy = [int(self.seed), *self.stream]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """Shorthand for ``RngState(seed, stream).generator()``."""
    return RngState(seed, tuple(stream)).generator()
