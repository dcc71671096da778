"""UAR evaluation: greedy inference, confusion matrices, per-class recall."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from rlser.corpus.manifest import Utterance
from rlser.env.features import FeatureCache
from rlser.labels import NUM_CLASSES

EVAL_BATCH = 128


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (4, 4), rows = ground truth, columns = predicted

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        if counts.shape != (NUM_CLASSES, NUM_CLASSES) or np.any(counts < 0):
            raise ValueError("confusion matrix must be 4x4 with non-negative counts")

    @classmethod
    def from_pairs(cls, truths, predictions) -> "ConfusionMatrix":
        counts = np.zeros((NUM_CLASSES, NUM_CLASSES), dtype=np.int64)
        for t, p in zip(truths, predictions, strict=True):
            counts[int(t), int(p)] += 1
        return cls(counts)

    def per_class_recall(self) -> np.ndarray:
        row_sums = self.counts.sum(axis=1)
        with np.errstate(invalid="ignore"):
            recall = np.where(row_sums > 0, np.diag(self.counts) / np.maximum(row_sums, 1), np.nan)
        return recall

    def uar(self) -> float:
        """Unweighted average of per-class recalls; classes absent from the
        test set are excluded (with a warning)."""
        recall = self.per_class_recall()
        present = ~np.isnan(recall)
        if not np.all(present):
            warnings.warn(f"UAR computed over {int(present.sum())}/{NUM_CLASSES} classes present in the test set")
        return float(np.mean(recall[present]) * 100.0)


def predict_greedy(net, utterances: list[Utterance], features: FeatureCache) -> np.ndarray:
    """Argmax actions over eval-mode forwards, batched."""
    predictions = np.empty(len(utterances), dtype=np.int64)
    for start in range(0, len(utterances), EVAL_BATCH):
        chunk = utterances[start : start + EVAL_BATCH]
        stack = np.stack([features.get(u) for u in chunk])
        q = net.forward(stack, train=False)
        predictions[start : start + len(chunk)] = np.argmax(q, axis=1)
    return predictions


def evaluate_uar(net, utterances: list[Utterance], features: FeatureCache) -> tuple[ConfusionMatrix, float]:
    """Greedy inference over a labeled test set -> (confusion, UAR %)."""
    if not utterances:
        raise ValueError("empty test set")
    unlabeled = [u.id for u in utterances if u.label is None]
    if unlabeled:
        raise ValueError(f"test set has unlabeled utterances: {unlabeled[:3]}")
    predictions = predict_greedy(net, utterances, features)
    truths = [int(u.label) for u in utterances]
    matrix = ConfusionMatrix.from_pairs(truths, predictions)
    return matrix, matrix.uar()


@dataclass
class SubsetResult:
    """Evaluation of one model on one named test subset."""

    name: str
    uar: float
    per_class_recall: list[float]
    n_examples: int


@dataclass
class RunResult:
    """One seed's end-to-end outcome."""

    seed: int
    method: str
    scheme: str
    subsets: dict[str, SubsetResult]
    frozen_base: dict[str, SubsetResult]
    steps_consumed: int
    wall_clock_s: float
    pretrain_epochs_run: int = 0


@dataclass
class UARReport:
    """Aggregate over seeds: mean and (for >= 2 repeats) std per subset."""

    scenario: str
    method: str
    scheme: str
    seeds: list[int]
    runs: list[RunResult] = field(default_factory=list)

    def subset_stats(self, subset: str, frozen: bool = False) -> tuple[float, float | None]:
        values = [
            (r.frozen_base if frozen else r.subsets)[subset].uar
            for r in self.runs
            if subset in (r.frozen_base if frozen else r.subsets)
        ]
        if not values:
            raise KeyError(f"no runs carry subset {subset!r}")
        mean = float(np.mean(values))
        std = float(np.std(values, ddof=1)) if len(values) >= 2 else None
        return mean, std

    def to_record(self) -> dict:
        record = {
            "scenario": self.scenario,
            "method": self.method,
            "scheme": self.scheme,
            "seeds": self.seeds,
            "runs": [
                {
                    "seed": r.seed,
                    "steps": r.steps_consumed,
                    "wall_clock_s": round(r.wall_clock_s, 2),
                    "pretrain_epochs_run": r.pretrain_epochs_run,
                    "subsets": {
                        k: {"uar": v.uar, "recall": v.per_class_recall, "n": v.n_examples}
                        for k, v in r.subsets.items()
                    },
                    "frozen_base": {
                        k: {"uar": v.uar, "recall": v.per_class_recall, "n": v.n_examples}
                        for k, v in r.frozen_base.items()
                    },
                }
                for r in self.runs
            ],
        }
        for subset in self.runs[0].subsets if self.runs else []:
            mean, std = self.subset_stats(subset)
            record[f"uar_{subset}_mean"] = round(mean, 2)
            if std is not None:
                record[f"uar_{subset}_std"] = round(std, 2)
        return record
