"""The CNN-LSTM network shared by supervised pre-training and the DQN.

Architecture, in order: Conv2D(32 filters, 5x5, ReLU) -> BatchNorm ->
Conv2D(64 filters, 3x3, ReLU) -> fold to an 87-step sequence -> LSTM(16) ->
Dense(256, ReLU) -> Dropout(0.3) -> Dense(4, linear). The linear head emits
Q-values; SoftmaxHead wraps the same parameters with a softmax +
cross-entropy for pre-training, so transferring into the DQN is a head swap,
not a copy.
"""

from __future__ import annotations

import numpy as np

from rlser.labels import NUM_CLASSES
from rlser.nn.layers import LSTM, BatchNorm, Conv2D, Dense, Dropout, Layer, SequenceFold

INPUT_SHAPE = (40, 87)
DEFAULT_CONV_FILTERS = (32, 64)
DEFAULT_LSTM_UNITS = 16
DEFAULT_DENSE_UNITS = 256
DEFAULT_DROPOUT = 0.3


class QNetwork:
    """Q-value network over (N, 40, 87) feature batches."""

    def __init__(
        self,
        seed: int = 0,
        conv_filters: tuple[int, int] = DEFAULT_CONV_FILTERS,
        lstm_units: int = DEFAULT_LSTM_UNITS,
        dense_units: int = DEFAULT_DENSE_UNITS,
        dropout: float = DEFAULT_DROPOUT,
        n_outputs: int = NUM_CLASSES,
        input_shape: tuple[int, int] = INPUT_SHAPE,
        dtype=np.float32,
    ):
        self.architecture = {
            "input_shape": list(input_shape),
            "conv_filters": list(conv_filters),
            "conv_kernels": [5, 3],
            "lstm_units": lstm_units,
            "dense_units": dense_units,
            "dropout": dropout,
            "n_outputs": n_outputs,
        }
        self.dtype = np.dtype(dtype)
        h, w = input_shape
        rng = np.random.default_rng(seed)
        f1, f2 = conv_filters
        self.conv1 = Conv2D(1, f1, 5, relu=True, rng=rng, dtype=dtype)
        self.conv1.is_input_layer = True  # nothing consumes d(input)
        self.bn = BatchNorm(f1, dtype=dtype)
        self.conv2 = Conv2D(f1, f2, 3, relu=True, rng=rng, dtype=dtype)
        self.fold = SequenceFold()
        self.lstm = LSTM(h * f2, lstm_units, rng=rng, dtype=dtype)
        self.dense = Dense(lstm_units, dense_units, relu=True, rng=rng, dtype=dtype)
        self.dropout = Dropout(dropout)
        self.head = Dense(dense_units, n_outputs, relu=False, rng=rng, dtype=dtype)
        self._layers: dict[str, Layer] = {
            "conv1": self.conv1,
            "bn": self.bn,
            "conv2": self.conv2,
            "fold": self.fold,
            "lstm": self.lstm,
            "dense": self.dense,
            "dropout": self.dropout,
            "head": self.head,
        }
        self.input_shape = input_shape

    # -- forward/backward ----------------------------------------------------

    def forward(self, x: np.ndarray, train: bool = False, rng: np.random.Generator | None = None) -> np.ndarray:
        """Q-values (N, n_outputs). Eval mode is deterministic; train mode
        needs an rng for dropout and caches activations for backward."""
        x = np.asarray(x, dtype=self.dtype)
        if x.ndim == 2:
            x = x[None]
        if x.shape[1:] != self.input_shape:
            raise ValueError(f"expected input (N, {self.input_shape[0]}, {self.input_shape[1]}), got {x.shape}")
        y = x[..., None]
        for layer in self._ordered():
            y = layer.forward(y, train=train, rng=rng)
        return y

    def backward(self, d_out: np.ndarray) -> None:
        """Accumulate parameter gradients for the last train-mode forward."""
        dy = np.asarray(d_out, dtype=self.dtype)
        for layer in reversed(self._ordered()):
            dy = layer.backward(dy)

    def _ordered(self) -> list[Layer]:
        return [self.conv1, self.bn, self.conv2, self.fold, self.lstm, self.dense, self.dropout, self.head]

    # -- parameter access ----------------------------------------------------

    def params(self) -> dict[str, np.ndarray]:
        """Live parameter tensors keyed 'layer/name' in a stable order."""
        return {
            f"{lname}/{pname}": arr
            for lname, layer in self._layers.items()
            for pname, arr in layer.params.items()
        }

    def grads(self) -> dict[str, np.ndarray]:
        return {
            f"{lname}/{pname}": arr
            for lname, layer in self._layers.items()
            for pname, arr in layer.grads.items()
        }

    def zero_grads(self) -> None:
        for layer in self._layers.values():
            layer.zero_grads()

    def state_tensors(self) -> dict[str, np.ndarray]:
        """Parameters plus non-trainable state (batch-norm running stats)."""
        out = dict(self.params())
        out["bn/running_mean"] = self.bn.running_mean
        out["bn/running_var"] = self.bn.running_var
        return out

    def load_state_tensors(self, tensors: dict[str, np.ndarray]) -> None:
        own = self.state_tensors()
        missing = set(own) - set(tensors)
        extra = set(tensors) - set(own)
        if missing or extra:
            raise ValueError(f"tensor set mismatch: missing {sorted(missing)}, unexpected {sorted(extra)}")
        for name, arr in tensors.items():
            target = own[name]
            arr = np.asarray(arr, dtype=target.dtype)
            if arr.shape != target.shape:
                raise ValueError(f"shape mismatch for {name}: {arr.shape} vs {target.shape}")
            target[...] = arr

    def param_count(self) -> int:
        return sum(p.size for p in self.params().values())

    def clone(self) -> "QNetwork":
        """Deep copy (used for target networks and serving snapshots)."""
        twin = QNetwork(
            seed=0,
            conv_filters=tuple(self.architecture["conv_filters"]),
            lstm_units=self.architecture["lstm_units"],
            dense_units=self.architecture["dense_units"],
            dropout=self.architecture["dropout"],
            n_outputs=self.architecture["n_outputs"],
            input_shape=tuple(self.architecture["input_shape"]),
            dtype=self.dtype,
        )
        twin.load_state_tensors({k: v.copy() for k, v in self.state_tensors().items()})
        return twin


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


class SoftmaxHead:
    """Cross-entropy training view over a QNetwork's parameters."""

    def __init__(self, net: QNetwork):
        self.net = net

    def predict_proba(self, x: np.ndarray, train: bool = False, rng=None) -> np.ndarray:
        return softmax(self.net.forward(x, train=train, rng=rng))

    def loss_and_backward(self, x: np.ndarray, labels: np.ndarray, rng: np.random.Generator) -> float:
        """Mean cross-entropy over the batch; accumulates gradients on the
        shared network."""
        logits = self.net.forward(x, train=True, rng=rng)
        probs = softmax(logits)
        n = len(labels)
        eps = np.finfo(probs.dtype).tiny
        loss = float(-np.log(np.maximum(probs[np.arange(n), labels], eps)).mean())
        dlogits = probs.copy()
        dlogits[np.arange(n), labels] -= 1.0
        self.net.backward(dlogits / n)
        return loss
