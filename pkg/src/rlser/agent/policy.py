"""Action-selection policies: greedy, epsilon-greedy, and Max-Boltzmann.

Max-Boltzmann exploits greedily with probability 1 - epsilon and otherwise
samples from the Boltzmann distribution softmax(q / temperature). Argmax ties
break toward the lowest action index, deterministically.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class PolicyKind(str, Enum):
    MAX_BOLTZMANN = "max_boltzmann"
    EPSILON_GREEDY = "epsilon_greedy"
    GREEDY = "greedy"


@dataclass(frozen=True)
class PolicyConfig:
    kind: PolicyKind = PolicyKind.MAX_BOLTZMANN
    temperature: float = 1.0
    epsilon_start: float = 1.0
    epsilon_end: float = 0.1
    epsilon_decay_steps: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        for eps in (self.epsilon_start, self.epsilon_end):
            if not (0.0 <= eps <= 1.0):
                raise ValueError("epsilon must stay in [0, 1]")
        if self.epsilon_decay_steps < 1:
            raise ValueError("epsilon_decay_steps must be >= 1")

    def epsilon_at(self, step: int) -> float:
        """Linear from epsilon_start to epsilon_end over decay_steps, then
        clamped; monotone non-increasing when start >= end."""
        frac = min(max(step, 0) / self.epsilon_decay_steps, 1.0)
        return self.epsilon_start + (self.epsilon_end - self.epsilon_start) * frac


def boltzmann_probabilities(q: np.ndarray, temperature: float) -> np.ndarray:
    z = np.asarray(q, dtype=np.float64) / temperature
    z -= z.max()
    e = np.exp(z)
    return e / e.sum()


def select_action(
    policy: PolicyConfig,
    q: np.ndarray,
    rng: np.random.Generator,
    step: int = 0,
) -> int:
    """Pick an action from one Q-value row."""
    q = np.asarray(q)
    if q.ndim != 1 or not np.all(np.isfinite(q)):
        raise ValueError("q must be a finite 1-D vector")
    greedy = int(np.argmax(q))
    if policy.kind is PolicyKind.GREEDY:
        return greedy
    eps = policy.epsilon_at(step)
    if rng.random() >= eps:
        return greedy
    if policy.kind is PolicyKind.EPSILON_GREEDY:
        return int(rng.integers(len(q)))
    probs = boltzmann_probabilities(q, policy.temperature)
    return int(rng.choice(len(q), p=probs))
