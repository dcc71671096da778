"""Emotion-recognition environments.

The RL framing: the state is an utterance's feature matrix, the action is an
emotion class, the reward is +1/-1 from the feedback channel, and the next
state is simply the next utterance in the stream (action-independent).

EmotionEnv walks shuffled epochs over a labeled set and ends the episode
after one full pass (each utterance exactly once). LiveFeedEnv samples
endlessly with replacement and never raises done; its episode counter just
advances every episode_length steps for bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from rlser.corpus.manifest import Utterance
from rlser.env.features import FeatureCache, NoiseConfig
from rlser.env.feedback import scripted_reward


class StreamOrdering(str, Enum):
    SHUFFLED_EPOCH = "shuffled_epoch"
    ENDLESS_RANDOM = "endless_random"


@dataclass(frozen=True)
class StreamConfig:
    ordering: StreamOrdering = StreamOrdering.SHUFFLED_EPOCH
    noise: NoiseConfig | None = None
    episode_length: int = 256


@dataclass(frozen=True)
class EnvState:
    utterance_id: str  # qualified id
    state_key: str  # cache key (qualified id + augmentation/noise markers)
    features: np.ndarray  # (40, 87) float32
    position: int
    done: bool


class EmotionEnv:
    """Scripted-reward environment over a labeled utterance set."""

    def __init__(
        self,
        utterances: list[Utterance],
        seed: int,
        config: StreamConfig = StreamConfig(),
        features: FeatureCache | None = None,
    ):
        if not utterances:
            raise ValueError("environment needs a non-empty utterance set")
        unlabeled = [u.id for u in utterances if u.label is None]
        if unlabeled:
            raise ValueError(f"scripted environments need labels; missing on {unlabeled[:3]}")
        self.utterances = list(utterances)
        self.config = config
        self.features = features or FeatureCache(noise=config.noise, seed=seed)
        self.rng = np.random.default_rng(seed)
        self.episode = 0
        self._order: np.ndarray | None = None
        self._pos = 0
        self._endless = config.ordering is StreamOrdering.ENDLESS_RANDOM

    # -- stream mechanics --------------------------------------------------

    def _draw_index(self, position: int) -> int:
        if self._endless:
            return int(self.rng.integers(len(self.utterances)))
        return int(self._order[position])

    def _state_at(self, index: int, position: int) -> EnvState:
        u = self.utterances[index]
        return EnvState(
            utterance_id=u.qualified_id,
            state_key=self.features.state_key(u),
            features=self.features.get(u),
            position=position,
            done=False,
        )

    def reset(self) -> EnvState:
        if not self._endless:
            self._order = self.rng.permutation(len(self.utterances))
        self._pos = 0
        self._current = self._draw_index(0)
        self._done = False
        return self._state_at(self._current, 0)

    def episode_length(self) -> int:
        return self.config.episode_length if self._endless else len(self.utterances)

    def label_of_current(self):
        return self.utterances[self._current].label

    def step(self, action: int) -> tuple[float, EnvState | None, bool]:
        """Reward the action on the current utterance and advance the stream.

        Returns (reward, next_state, done); done=True only for epoch streams
        at the end of a full pass, in which case next_state is None.
        """
        if getattr(self, "_done", True):
            raise RuntimeError("step called on a finished episode; call reset()")
        reward = scripted_reward(action, self.utterances[self._current].label)
        next_pos = self._pos + 1

        if not self._endless and next_pos >= len(self.utterances):
            self._done = True
            self.episode += 1
            return reward, None, True

        if self._endless and next_pos % self.config.episode_length == 0:
            self.episode += 1
        self._pos = next_pos
        self._current = self._draw_index(next_pos)
        return reward, self._state_at(self._current, next_pos), False


def make_live_feed(
    utterances: list[Utterance],
    seed: int,
    noise: NoiseConfig | None = None,
    episode_length: int = 256,
) -> EmotionEnv:
    """Endless stream over the target-train utterances, optional noise mixed
    at the configured SNR before feature extraction."""
    cfg = StreamConfig(ordering=StreamOrdering.ENDLESS_RANDOM, noise=noise, episode_length=episode_length)
    return EmotionEnv(utterances, seed=seed, config=cfg)
