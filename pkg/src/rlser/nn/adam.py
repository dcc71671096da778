"""Adam with bias correction, tracking first/second moments per parameter."""

from __future__ import annotations

import numpy as np

LEARNING_RATE = 2.5e-4


class NanGradientError(RuntimeError):
    """A gradient turned non-finite; the update is aborted."""


class Adam:
    """Standard Adam update over a named parameter dict.

    The parameter arrays are updated in place so layers see new values
    without rewiring. Moments live per parameter name and mirror shapes.
    """

    def __init__(
        self,
        params: dict[str, np.ndarray],
        learning_rate: float = LEARNING_RATE,
        beta1: float = 0.9,
        beta2: float = 0.999,
        epsilon: float = 1e-7,
    ):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self._params = params
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        for name, g in grads.items():
            if not np.all(np.isfinite(g)):
                raise NanGradientError(f"non-finite gradient for parameter {name!r}")
        self.step_count += 1
        t = self.step_count
        b1, b2 = self.beta1, self.beta2
        bias1 = 1.0 - b1**t
        bias2 = 1.0 - b2**t
        for name, p in self._params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * np.square(g)
            p -= (self.learning_rate / bias1) * m / (np.sqrt(v / bias2) + self.epsilon)

    def state_tensors(self) -> dict[str, np.ndarray]:
        out = {}
        for name in self._params:
            out[f"adam.m/{name}"] = self.m[name]
            out[f"adam.v/{name}"] = self.v[name]
        return out

    def load_state_tensors(self, tensors: dict[str, np.ndarray], step_count: int) -> None:
        for name in self._params:
            self.m[name][...] = tensors[f"adam.m/{name}"]
            self.v[name][...] = tensors[f"adam.v/{name}"]
        self.step_count = step_count
