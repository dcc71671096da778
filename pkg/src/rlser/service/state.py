"""Shared service state: the published model snapshot, the pending-inference
store (via the feedback channel), and metrics.

Request handlers only ever read the current snapshot reference (replaced
atomically by the trainer) and push judgments into the feedback channel;
the trainer is the sole parameter writer.
"""

from __future__ import annotations

import threading
import time
import uuid
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from rlser.env.feedback import HumanFeedbackChannel
from rlser.labels import EmotionLabel
from rlser.nn.network import QNetwork

ROLLING_REWARD_WINDOW = 100


@dataclass
class ModelSnapshot:
    net: QNetwork  # read-only by convention: replaced, never mutated
    version: int


@dataclass
class Metrics:
    inferences: int = 0
    feedbacks: int = 0
    drops: int = 0
    rejected: int = 0
    training_steps: int = 0
    replay_size: int = 0
    model_version: int = 0
    trainer_alarm: str | None = None
    rewards: deque = field(default_factory=lambda: deque(maxlen=ROLLING_REWARD_WINDOW))

    def rolling_mean_reward(self) -> float | None:
        if not self.rewards:
            return None
        return float(np.mean(self.rewards))

    def snapshot(self) -> dict:
        return {
            "inferences": self.inferences,
            "feedbacks": self.feedbacks,
            "drops": self.drops,
            "rejected": self.rejected,
            "training_steps": self.training_steps,
            "replay_size": self.replay_size,
            "model_version": self.model_version,
            "rolling_mean_reward": self.rolling_mean_reward(),
            "trainer_alarm": self.trainer_alarm,
        }


class ServiceState:
    def __init__(self, net: QNetwork, model_version: int, channel: HumanFeedbackChannel):
        self._snapshot = ModelSnapshot(net=net, version=model_version)
        self._snap_lock = threading.Lock()
        self.channel = channel
        self.metrics = Metrics(model_version=model_version)
        self.metrics_lock = threading.Lock()

    # -- snapshot handover -------------------------------------------------

    def current_snapshot(self) -> ModelSnapshot:
        with self._snap_lock:
            return self._snapshot

    def publish(self, net: QNetwork, version: int) -> None:
        with self._snap_lock:
            self._snapshot = ModelSnapshot(net=net, version=version)
        with self.metrics_lock:
            self.metrics.model_version = version

    # -- inference bookkeeping ----------------------------------------------

    def new_inference_id(self) -> str:
        return uuid.uuid4().hex

    def record_inference(self, inference_id: str, features: np.ndarray, action: int) -> None:
        self.channel.register(inference_id, features, action)
        with self.metrics_lock:
            self.metrics.inferences += 1

    def record_feedback(self, reward: float) -> None:
        with self.metrics_lock:
            self.metrics.feedbacks += 1
            self.metrics.rewards.append(reward)

    def sweep_expired(self) -> None:
        self.channel.expire_due()
        with self.metrics_lock:
            self.metrics.drops = self.channel.stats.expired


def emotion_name(action: int) -> str:
    return EmotionLabel(action).label_name


def utc_now_iso() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())
