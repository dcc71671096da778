from rlser.nn.adam import LEARNING_RATE, Adam, NanGradientError
from rlser.nn.checkpoint import (
    CheckpointError,
    architecture_hash,
    load_checkpoint,
    read_header,
    save_checkpoint,
)
from rlser.nn.layers import LSTM, BatchNorm, Conv2D, Dense, Dropout, LayerError, SequenceFold
from rlser.nn.network import INPUT_SHAPE, QNetwork, SoftmaxHead, softmax

__all__ = [
    "Adam",
    "BatchNorm",
    "CheckpointError",
    "Conv2D",
    "Dense",
    "Dropout",
    "INPUT_SHAPE",
    "LEARNING_RATE",
    "LSTM",
    "LayerError",
    "NanGradientError",
    "QNetwork",
    "SequenceFold",
    "SoftmaxHead",
    "architecture_hash",
    "load_checkpoint",
    "read_header",
    "save_checkpoint",
    "softmax",
]
