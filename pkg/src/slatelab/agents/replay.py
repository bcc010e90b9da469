import threading
from typing import List

import numpy as np

from ..models import Transition


class ExperienceBuffer:
    """
    FIFO replay memory shared by rollout producers and one trainer

    Stored as a ring so sampling is constant time per item.
    """

    def __init__(self, capacity: int = 100_000):
        """
        Initialize the buffer

        Args:
            capacity: Maximum number of transitions; the oldest are evicted
        """
        self.capacity = capacity
        self._items: List[Transition] = []
        self._next = 0
        self._lock = threading.Lock()
        self.total_added = 0

    def add(self, transition: Transition) -> None:
        with self._lock:
            if len(self._items) < self.capacity:
                self._items.append(transition)
            else:
                self._items[self._next] = transition
            self._next = (self._next + 1) % self.capacity
            self.total_added += 1

    def can_sample(self, batch_size: int) -> bool:
        return len(self) >= batch_size

    def sample(self, batch_size: int, rng: np.random.Generator) -> List[Transition]:
        """
        Uniform mini-batch, drawn with replacement
        """
        with self._lock:
            indices = rng.integers(len(self._items), size=batch_size)
            return [self._items[int(i)] for i in indices]

    def __len__(self) -> int:
        with self._lock:
            return len(self._items)
