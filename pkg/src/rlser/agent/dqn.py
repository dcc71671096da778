"""Deep Q-learning: Bellman targets, the squared-error loss on taken
actions, and the training step that ties replay, the online/target network
pair, and Adam together."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rlser.agent.replay import ReplayBuffer, Transition
from rlser.nn.adam import Adam, LEARNING_RATE
from rlser.nn.network import QNetwork


@dataclass(frozen=True)
class AgentConfig:
    gamma: float = 0.9
    batch_size: int = 128
    replay_capacity: int = 5000
    target_sync_period: int = 500  # in training steps; 0 disables the lagged copy
    train_start: int = 256  # env steps before the first update
    steps_per_update: int = 4
    learning_rate: float = LEARNING_RATE

    def __post_init__(self):
        if not (0.0 <= self.gamma <= 1.0):
            raise ValueError("gamma must be in [0, 1]")
        if self.batch_size < 1 or self.replay_capacity < self.batch_size:
            raise ValueError("replay capacity must hold at least one batch")
        if self.target_sync_period < 0 or self.steps_per_update < 1:
            raise ValueError("invalid cadence")


def compute_targets(
    batch: list[Transition],
    target_net,
    gamma: float,
    next_q_provider=None,
) -> np.ndarray:
    """Bellman regression targets: r + gamma * max_a Q_target(s', a) for
    non-terminal transitions, plain r for terminal ones.

    next_q_provider, when given, maps a list of transitions to their (N, 4)
    next-state Q-values (the trainer passes a cache keyed on stream state).
    """
    targets = np.array([t.reward for t in batch], dtype=np.float64)
    live = [k for k, t in enumerate(batch) if not t.terminal]
    if live and gamma > 0.0:
        subset = [batch[k] for k in live]
        if next_q_provider is not None:
            next_q = next_q_provider(subset)
        else:
            stack = np.stack([t.next_state for t in subset])
            next_q = target_net.forward(stack, train=False)
        targets[live] += gamma * np.max(next_q, axis=1)
    return targets


def dqn_loss(q_selected: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared Bellman error and its gradient w.r.t. the selected
    Q-values: L = mean((target - q)^2), dL/dq_i = -2 (target_i - q_i) / N."""
    q_selected = np.asarray(q_selected, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if q_selected.shape != targets.shape:
        raise ValueError("q/target length mismatch")
    diff = targets - q_selected
    n = len(diff)
    return float(np.mean(diff * diff)), -2.0 * diff / n


class DQNAgent:
    """Owns the online/target network pair, replay, and the optimizer.

    Single-writer: one loop calls observe/train_on_batch. Q-values of the
    frozen target net are cached per next_state_key and dropped on every
    sync, so finite utterance streams pay for at most one target forward per
    state per sync period.
    """

    def __init__(
        self,
        net: QNetwork,
        config: AgentConfig,
        seed: int = 0,
    ):
        self.online = net
        self.config = config
        self.target = net.clone() if config.target_sync_period > 0 else net
        self.replay = ReplayBuffer(config.replay_capacity)
        self.optimizer = Adam(net.params(), learning_rate=config.learning_rate)
        self.rng = np.random.default_rng(seed)
        self.train_steps = 0
        self.env_steps = 0
        self.target_version = 0
        self._next_q_cache: dict[str, np.ndarray] = {}

    # -- experience intake -----------------------------------------------

    def observe(self, t: Transition) -> None:
        self.replay.push(t)
        self.env_steps += 1

    def ready(self) -> bool:
        return len(self.replay) >= max(self.config.train_start, self.config.batch_size)

    def due_for_update(self) -> bool:
        return self.ready() and self.env_steps % self.config.steps_per_update == 0

    # -- training ----------------------------------------------------------

    def _cached_next_q(self, subset: list[Transition]) -> np.ndarray:
        keyed = [(i, t.next_state_key) for i, t in enumerate(subset)]
        missing = [i for i, key in keyed if key is None or key not in self._next_q_cache]
        if missing:
            stack = np.stack([subset[i].next_state for i in missing])
            fresh = self.target.forward(stack, train=False)
            for row, i in enumerate(missing):
                key = subset[i].next_state_key
                if key is not None:
                    self._next_q_cache[key] = fresh[row]
        out = np.empty((len(subset), self.online.architecture["n_outputs"]), dtype=np.float32)
        fresh_rows = {i: r for r, i in enumerate(missing)}
        for i, key in keyed:
            if i in fresh_rows:
                out[i] = fresh[fresh_rows[i]]
            else:
                out[i] = self._next_q_cache[key]
        return out

    def train_on_batch(self, batch: list[Transition] | None = None) -> float:
        """One DQN update: Bellman targets from the target net, squared loss
        on the taken actions, one Adam step; target sync every C steps."""
        if batch is None:
            if not self.ready():
                raise RuntimeError("replay below train-start threshold")
            batch = self.replay.sample(self.config.batch_size, self.rng)
        targets = compute_targets(batch, self.target, self.config.gamma, self._cached_next_q)

        states = np.stack([t.state for t in batch])
        actions = np.array([t.action for t in batch])
        q = self.online.forward(states, train=True, rng=self.rng)
        rows = np.arange(len(batch))
        loss, dq_selected = dqn_loss(q[rows, actions], targets)

        dq = np.zeros_like(q)
        dq[rows, actions] = dq_selected.astype(q.dtype)  # only the taken action's output carries gradient
        self.online.zero_grads()
        self.online.backward(dq)
        self.optimizer.step(self.online.grads())

        self.train_steps += 1
        period = self.config.target_sync_period
        if period == 0 or self.train_steps % period == 0:
            self.sync_target()
        return loss

    def sync_target(self) -> None:
        if self.target is not self.online:
            self.target.load_state_tensors(self.online.state_tensors())
        self.target_version += 1
        self._next_q_cache.clear()
