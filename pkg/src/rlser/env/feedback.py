"""Feedback channels: scripted ground-truth rewards and the asynchronous
human judgment queue used by the live service."""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from rlser.agent.replay import Transition
from rlser.labels import EmotionLabel

REWARD_CORRECT = 1.0
REWARD_INCORRECT = -1.0
DEFAULT_FEEDBACK_TIMEOUT_S = 300.0


def scripted_reward(action: int, label: EmotionLabel) -> float:
    """+1 iff the inferred emotion matches the ground truth, else -1."""
    return REWARD_CORRECT if int(action) == int(label) else REWARD_INCORRECT


class FeedbackError(Exception):
    pass


class UnknownInferenceError(FeedbackError):
    pass


class DuplicateJudgmentError(FeedbackError):
    pass


class ExpiredInferenceError(FeedbackError):
    pass


class FeedbackQueueFullError(FeedbackError):
    pass


@dataclass
class _Pending:
    state: np.ndarray
    action: int
    deadline: float
    state_key: str | None = None


@dataclass
class FeedbackStats:
    registered: int = 0
    judged: int = 0
    expired: int = 0
    rejected: int = 0


class HumanFeedbackChannel:
    """Multi-producer, single-consumer judgment intake.

    Inferences register as pending; a thumbs up/down resolves them into a
    terminal reward transition on a bounded queue (producers get
    FeedbackQueueFullError instead of blocking). Judgments past the timeout
    are dropped and counted. The clock is injected for testability.
    """

    def __init__(
        self,
        timeout_s: float = DEFAULT_FEEDBACK_TIMEOUT_S,
        queue_capacity: int = 1024,
        clock=time.monotonic,
    ):
        self.timeout_s = timeout_s
        self.queue_capacity = queue_capacity
        self.clock = clock
        self.stats = FeedbackStats()
        self._pending: dict[str, _Pending] = {}
        self._judged: set[str] = set()
        self._expired: set[str] = set()
        self._queue: deque[Transition] = deque()
        self._lock = threading.Lock()

    def register(self, inference_id: str, state: np.ndarray, action: int, state_key: str | None = None) -> None:
        with self._lock:
            if inference_id in self._pending or inference_id in self._judged or inference_id in self._expired:
                raise ValueError(f"inference id {inference_id!r} already registered")
            self._pending[inference_id] = _Pending(
                state=state, action=action, deadline=self.clock() + self.timeout_s, state_key=state_key
            )
            self.stats.registered += 1

    def resolve(self, inference_id: str, judgment: str) -> float:
        """Turn a judgment ('up'/'down') into a queued reward transition and
        return the reward delivered."""
        if judgment not in ("up", "down"):
            raise ValueError(f"judgment must be 'up' or 'down', got {judgment!r}")
        with self._lock:
            self._expire_locked()
            if inference_id in self._judged:
                self.stats.rejected += 1
                raise DuplicateJudgmentError(f"inference {inference_id!r} was already judged")
            if inference_id in self._expired:
                self.stats.rejected += 1
                raise ExpiredInferenceError(f"inference {inference_id!r} expired before judgment")
            record = self._pending.get(inference_id)
            if record is None:
                self.stats.rejected += 1
                raise UnknownInferenceError(f"unknown inference {inference_id!r}")
            if len(self._queue) >= self.queue_capacity:
                raise FeedbackQueueFullError("feedback queue is full, try again later")
            del self._pending[inference_id]
            self._judged.add(inference_id)
            reward = REWARD_CORRECT if judgment == "up" else REWARD_INCORRECT
            self._queue.append(
                Transition(
                    state=record.state,
                    action=record.action,
                    reward=reward,
                    next_state=None,
                    terminal=True,
                    state_key=record.state_key,
                )
            )
            self.stats.judged += 1
            return reward

    def _expire_locked(self) -> int:
        now = self.clock()
        dead = [k for k, v in self._pending.items() if v.deadline < now]
        for k in dead:
            del self._pending[k]
            self._expired.add(k)
        self.stats.expired += len(dead)
        return len(dead)

    def expire_due(self) -> int:
        with self._lock:
            return self._expire_locked()

    def drain(self, max_items: int | None = None) -> list[Transition]:
        """Consumer side: pop up to max_items queued transitions."""
        out = []
        with self._lock:
            while self._queue and (max_items is None or len(out) < max_items):
                out.append(self._queue.popleft())
        return out

    def pending_count(self) -> int:
        with self._lock:
            return len(self._pending)

    def queued_count(self) -> int:
        with self._lock:
            return len(self._queue)


def resolve_human_feedback(channel: HumanFeedbackChannel, inference_id: str, judgment: str) -> float:
    """Module-level alias mirroring the operation name used elsewhere."""
    return channel.resolve(inference_id, judgment)
