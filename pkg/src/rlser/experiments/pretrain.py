"""Supervised pre-training of the base model (cross-entropy on the softmax
view of the Q-network)."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from rlser.corpus.manifest import Utterance
from rlser.env.features import FeatureCache
from rlser.nn.adam import Adam
from rlser.nn.network import QNetwork, SoftmaxHead

PRETRAIN_BATCH = 128
HOLDOUT_FRACTION = 0.1
EARLY_STOP_PATIENCE = 5


@dataclass
class PretrainHistory:
    epochs_run: int
    losses: list[float]
    holdout_accuracy: list[float]
    best_epoch: int


def _stratified_holdout(utterances: list[Utterance], fraction: float, rng: np.random.Generator):
    by_class = defaultdict(list)
    for u in utterances:
        by_class[u.label].append(u)
    train, held = [], []
    for label in sorted(by_class):
        members = sorted(by_class[label], key=lambda u: u.id)
        order = rng.permutation(len(members))
        n_held = max(1, int(round(len(members) * fraction))) if len(members) > 1 else 0
        held.extend(members[i] for i in order[:n_held])
        train.extend(members[i] for i in order[n_held:])
    return train, held


def _accuracy(net: QNetwork, utterances, features) -> float:
    from rlser.experiments.evaluate import predict_greedy

    if not utterances:
        return 0.0
    predictions = predict_greedy(net, utterances, features)
    truths = np.array([int(u.label) for u in utterances])
    return float(np.mean(predictions == truths))


def pretrain(
    train_set: list[Utterance],
    features: FeatureCache,
    net: QNetwork,
    epochs: int,
    seed: int,
    learning_rate: float = 2.5e-4,
    early_stop_patience: int = EARLY_STOP_PATIENCE,
) -> PretrainHistory:
    """Train the softmax view of `net` in place; returns the history.

    Early stopping watches held-out accuracy on a stratified 10% cut of the
    training set (patience in epochs); the best parameters are restored. With
    epochs=0 the network is left exactly at initialization.
    """
    if epochs < 0:
        raise ValueError("epochs must be >= 0")
    history = PretrainHistory(epochs_run=0, losses=[], holdout_accuracy=[], best_epoch=-1)
    if epochs == 0:
        return history

    rng = np.random.default_rng(seed)
    train, held = _stratified_holdout(train_set, HOLDOUT_FRACTION, rng)
    head = SoftmaxHead(net)
    optimizer = Adam(net.params(), learning_rate=learning_rate)
    features.warm(train)

    labels = np.array([int(u.label) for u in train])
    stack = np.stack([features.get(u) for u in train])

    best_acc = -1.0
    best_state = None
    stale = 0
    for epoch in range(epochs):
        order = rng.permutation(len(train))
        epoch_losses = []
        for start in range(0, len(train), PRETRAIN_BATCH):
            idx = order[start : start + PRETRAIN_BATCH]
            net.zero_grads()
            loss = head.loss_and_backward(stack[idx], labels[idx], rng)
            if not np.isfinite(loss):
                raise FloatingPointError(f"pre-training diverged at epoch {epoch} (loss {loss})")
            optimizer.step(net.grads())
            epoch_losses.append(loss)
        history.losses.append(float(np.mean(epoch_losses)))
        acc = _accuracy(net, held, features)
        history.holdout_accuracy.append(acc)
        history.epochs_run = epoch + 1
        if acc > best_acc:
            best_acc = acc
            best_epoch = epoch
            best_state = {k: v.copy() for k, v in net.state_tensors().items()}
            stale = 0
        else:
            stale += 1
            if stale >= early_stop_patience:
                break
    if best_state is not None:
        net.load_state_tensors(best_state)
        history.best_epoch = best_epoch
    return history
