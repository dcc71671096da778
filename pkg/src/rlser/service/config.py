"""Service configuration with environment-variable overrides.

Every field can be overridden by RLSER_SERVICE_<FIELD> (upper-cased), e.g.
RLSER_SERVICE_PORT=9000 or RLSER_SERVICE_FEEDBACK_TIMEOUT_S=60.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

ENV_PREFIX = "RLSER_SERVICE_"
MAX_UPLOAD_BYTES = 10 * 1024 * 1024


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    checkpoint_path: Path = Path("service-data/model.ckpt")
    static_dir: Path | None = None  # console assets, served at / when present
    feedback_timeout_s: float = 300.0
    feedback_queue_capacity: int = 1024
    train_every_feedbacks: int = 8  # trainer cadence: one update per N judged feedbacks
    replay_threshold: int = 128
    batch_size: int = 128
    replay_capacity: int = 5000
    gamma: float = 0.0  # service transitions are terminal, so the discount is moot
    learning_rate: float = 2.5e-4
    snapshot_every_steps: int = 50  # publish + checkpoint period, in training steps
    trainer_seed: int = 0

    def __post_init__(self):
        self.checkpoint_path = Path(self.checkpoint_path)
        if self.static_dir is not None:
            self.static_dir = Path(self.static_dir)
        if self.train_every_feedbacks < 1 or self.snapshot_every_steps < 1:
            raise ValueError("cadences must be positive")
        if self.replay_threshold < self.batch_size:
            raise ValueError("replay threshold must cover at least one batch")

    @classmethod
    def from_env(cls, **overrides) -> "ServiceConfig":
        kwargs = dict(overrides)
        for f in fields(cls):
            env_key = ENV_PREFIX + f.name.upper()
            if env_key not in os.environ or f.name in kwargs:
                continue
            raw = os.environ[env_key]
            if f.type in ("int", int):
                kwargs[f.name] = int(raw)
            elif f.type in ("float", float):
                kwargs[f.name] = float(raw)
            else:
                kwargs[f.name] = raw
        return cls(**kwargs)
