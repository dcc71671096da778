"""Experience transitions and the ring replay buffer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Transition:
    """One (s, a, r, s', terminal) experience.

    state_key / next_state_key optionally name the stream states they came
    from (utterance ids); the trainer uses them to cache target-network
    Q-values between target syncs.
    """

    state: np.ndarray  # (40, 87) float32
    action: int
    reward: float
    next_state: np.ndarray | None
    terminal: bool
    state_key: str | None = None
    next_state_key: str | None = None

    def __post_init__(self):
        if self.terminal and self.next_state is not None:
            raise ValueError("terminal transitions carry no next state")
        if not self.terminal and self.next_state is None:
            raise ValueError("non-terminal transitions need a next state")
        if not np.isfinite(self.reward):
            raise ValueError("reward must be finite")


class ReplayBuffer:
    """Fixed-capacity ring store with uniform sampling."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._items: list[Transition] = []
        self._write = 0

    def __len__(self) -> int:
        return len(self._items)

    def push(self, t: Transition) -> None:
        if len(self._items) < self.capacity:
            self._items.append(t)
        else:
            self._items[self._write] = t
        self._write = (self._write + 1) % self.capacity

    def sample(self, n: int, rng: np.random.Generator) -> list[Transition]:
        """Uniform sample without replacement within one draw."""
        if n > len(self._items):
            raise ValueError(f"cannot sample {n} transitions from a buffer of {len(self._items)}")
        idx = rng.choice(len(self._items), size=n, replace=False)
        return [self._items[i] for i in idx]

    def contents(self) -> list[Transition]:
        return list(self._items)
