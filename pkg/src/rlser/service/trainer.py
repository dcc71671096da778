"""The online trainer: consumes judged feedback into replay, takes DQN steps
at the configured cadence, and publishes immutable model snapshots.

Serving never blocks on training: handlers read whatever snapshot is
current, and a NaN abort freezes publication (alarm in /metrics) while the
last good snapshot keeps serving.
"""

from __future__ import annotations

import logging
import threading

from rlser.agent.dqn import AgentConfig, DQNAgent
from rlser.env.feedback import HumanFeedbackChannel
from rlser.nn.adam import NanGradientError
from rlser.nn.checkpoint import save_checkpoint
from rlser.nn.network import QNetwork
from rlser.service.config import ServiceConfig
from rlser.service.state import ServiceState

log = logging.getLogger(__name__)


class OnlineTrainer:
    """Single consumer of the feedback queue, sole writer of parameters."""

    def __init__(self, net: QNetwork, state: ServiceState, config: ServiceConfig):
        self.config = config
        self.state = state
        agent_cfg = AgentConfig(
            gamma=config.gamma,
            batch_size=config.batch_size,
            replay_capacity=config.replay_capacity,
            target_sync_period=0,  # terminal transitions never bootstrap
            train_start=config.replay_threshold,
            steps_per_update=1,
            learning_rate=config.learning_rate,
        )
        self.agent = DQNAgent(net, agent_cfg, seed=config.trainer_seed)
        self.model_version = state.current_snapshot().version
        self._feedbacks_since_update = 0
        self._steps_since_publish = 0
        self._stop = threading.Event()
        self._wake = threading.Event()
        self._thread: threading.Thread | None = None
        self.consumed_transitions = 0

    # -- lifecycle -----------------------------------------------------------

    def start(self) -> None:
        self._thread = threading.Thread(target=self._run, name="online-trainer", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        self._wake.set()
        if self._thread is not None:
            self._thread.join(timeout=30)

    def notify(self) -> None:
        """Handlers call this after queuing feedback."""
        self._wake.set()

    # -- the loop ------------------------------------------------------------

    def _run(self) -> None:
        while not self._stop.is_set():
            self._wake.wait(timeout=0.2)
            self._wake.clear()
            try:
                self.drain_and_train()
            except NanGradientError as exc:
                with self.state.metrics_lock:
                    self.state.metrics.trainer_alarm = str(exc)
                log.error("trainer halted on non-finite gradient: %s", exc)
                return
            except Exception:
                log.exception("trainer loop error")
                return

    def drain_and_train(self) -> int:
        """Pull queued transitions and run due updates; returns steps taken.

        Also callable synchronously (tests, soak harnesses) when the thread
        is not running.
        """
        steps = 0
        transitions = self.state.channel.drain()
        for t in transitions:
            self.agent.observe(t)
            self.consumed_transitions += 1
            self._feedbacks_since_update += 1
        with self.state.metrics_lock:
            self.state.metrics.replay_size = len(self.agent.replay)

        while self.agent.ready() and self._feedbacks_since_update >= self.config.train_every_feedbacks:
            self._feedbacks_since_update -= self.config.train_every_feedbacks
            self.agent.train_on_batch()
            steps += 1
            self._steps_since_publish += 1
            with self.state.metrics_lock:
                self.state.metrics.training_steps = self.agent.train_steps
            if self._steps_since_publish >= self.config.snapshot_every_steps:
                self.publish()
        return steps

    def publish(self) -> None:
        """Snapshot the online net, expose it to handlers, checkpoint it."""
        self._steps_since_publish = 0
        self.model_version += 1
        snapshot = self.agent.online.clone()
        self.state.publish(snapshot, self.model_version)
        save_checkpoint(
            self.config.checkpoint_path,
            snapshot,
            metadata={
                "stage": "online",
                "model_version": self.model_version,
                "training_steps": self.agent.train_steps,
            },
        )
