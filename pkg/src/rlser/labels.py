"""The four emotion classes and their stable integer codes."""

from __future__ import annotations

import enum


class EmotionLabel(enum.IntEnum):
    """Emotion categories, coded 0-3. The codes double as network output
    indices and RL action ids, so their order must never change."""

    HAPPINESS = 0
    SADNESS = 1
    ANGER = 2
    NEUTRAL = 3

    @classmethod
    def from_name(cls, name: str) -> "EmotionLabel":
        try:
            return cls[name.strip().upper()]
        except KeyError:
            valid = ", ".join(l.name.lower() for l in cls)
            raise ValueError(f"unknown emotion label {name!r} (expected one of: {valid})") from None

    @property
    def label_name(self) -> str:
        return self.name.lower()


NUM_CLASSES = len(EmotionLabel)

__all__ = ["EmotionLabel", "NUM_CLASSES"]
