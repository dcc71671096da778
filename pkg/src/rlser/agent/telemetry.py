"""Line-delimited training telemetry shared by the experiment runner and the
service trainer."""

from __future__ import annotations

import json
from pathlib import Path


class TelemetryLog:
    """Appends one JSON object per training event; None disables logging."""

    def __init__(self, path: str | Path | None):
        self._fh = None
        if path is not None:
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            self._fh = open(path, "a", encoding="utf-8")

    def record(self, step: int, episode: int, reward: float, loss: float | None, epsilon: float) -> None:
        if self._fh is None:
            return
        self._fh.write(
            json.dumps(
                {
                    "step": step,
                    "episode": episode,
                    "reward": reward,
                    "loss": loss,
                    "epsilon": round(epsilon, 6),
                }
            )
            + "\n"
        )

    def flush(self) -> None:
        if self._fh is not None:
            self._fh.flush()

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
