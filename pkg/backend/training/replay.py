"""
Replay buffer of complete admissions.
"""
import logging
from collections import deque
from typing import Iterable, List, Optional

import numpy as np

from core.exceptions import EmptyInputError
from core.rng import STREAM_REPLAY, RngState
from data_pipeline.trajectories import Trajectory

logger = logging.getLogger(__name__)


class ReplayBuffer:
    """
    Stores whole logged trajectories and samples them uniformly with
    replacement. Admissions are never split. With a capacity set, the oldest
    admissions are evicted first.

    Sampling for epoch ``n`` draws from the stream keyed by (seed, n), so a
    resumed run samples exactly what an uninterrupted one would.
    """

    def __init__(self, trajectories: Iterable[Trajectory] = (), capacity: Optional[int] = None, seed: int = 0):
        if capacity is not None and capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.rng_state = RngState(seed).child(STREAM_REPLAY)
        self._items = deque(maxlen=capacity)
        self.extend(trajectories)

    def __len__(self) -> int:
        return len(self._items)

    def __getitem__(self, index: int) -> Trajectory:
        return self._items[index]

    def add(self, trajectory: Trajectory):
        self._items.append(trajectory)

    def extend(self, trajectories: Iterable[Trajectory]):
        for trajectory in trajectories:
            self.add(trajectory)

    def epoch_rng(self, epoch: int) -> np.random.Generator:
        return self.rng_state.child(epoch).generator()

    def sample_indices(self, batch_size: int, rng: np.random.Generator) -> np.ndarray:
        if not self._items:
            raise EmptyInputError("cannot sample from an empty replay buffer")
        if batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")
        return rng.integers(0, len(self._items), size=batch_size)

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Trajectory]:
        return [self._items[int(i)] for i in self.sample_indices(batch_size, rng)]
