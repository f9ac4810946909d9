from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .lattice import Syndrome


@dataclass(frozen=True)
class Experience:
    state: Syndrome
    action: int  # absolute qubit index
    reward: float
    next_state: Syndrome
    terminal: bool


class ReplayMemory:
    """Bounded FIFO of experiences backed by a ring buffer."""

    def __init__(self, capacity: int = 3_000_000):
        if capacity < 1:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items: list[Experience] = []
        self._head = 0  # index of the oldest entry once full

    def __len__(self) -> int:
        return len(self._items)

    def append(self, e: Experience) -> None:
        if len(self._items) < self.capacity:
            self._items.append(e)
        else:
            self._items[self._head] = e
            self._head = (self._head + 1) % self.capacity

    def __iter__(self) -> Iterator[Experience]:
        """Oldest first."""
        items = self._items
        for k in range(len(items)):
            yield items[(self._head + k) % len(items)]

    def sample(self, batch_size: int, rng: np.random.Generator) -> list[Experience]:
        """Uniform sample without replacement."""
        if batch_size > len(self._items):
            raise ValueError(f"cannot sample {batch_size} from {len(self._items)} experiences")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[i] for i in idx]
