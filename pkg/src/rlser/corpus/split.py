"""Deterministic splits, class balancing, and source/target domain
composition."""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from enum import Enum

import numpy as np

from rlser.corpus.manifest import Corpus, Utterance
from rlser.labels import EmotionLabel

VTLP_BALANCE_RANGE = (0.9, 1.1)


class CompositionScheme(str, Enum):
    SEPARATE = "separate"
    MIXED50 = "mixed50"


@dataclass(frozen=True)
class DomainAssignment:
    """The three disjoint utterance sets one adaptation run consumes."""

    pretrain_set: tuple[Utterance, ...]
    rl_set: tuple[Utterance, ...]
    test_set: tuple[Utterance, ...]
    scheme: CompositionScheme

    def __post_init__(self):
        for name in ("pretrain_set", "rl_set", "test_set"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        sets = {
            "pretrain": {u.qualified_id for u in self.pretrain_set},
            "rl": {u.qualified_id for u in self.rl_set},
            "test": {u.qualified_id for u in self.test_set},
        }
        names = list(sets)
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                overlap = sets[a] & sets[b]
                if overlap:
                    raise ValueError(f"{a} and {b} sets overlap: {sorted(overlap)[:3]}...")
        if any(u.augmented for u in self.test_set):
            raise ValueError("test set contains augmented utterances")


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def split_corpus(
    corpus: Corpus,
    test_fraction: float,
    seed: int,
    by_speaker: bool = False,
) -> tuple[list[Utterance], list[Utterance]]:
    """Stratified train/test split.

    Per-class test count is max(1, round(count * fraction)); the split is a
    pure function of (corpus, fraction, seed). With by_speaker=True whole
    speakers go to one side (per-class stratification then becomes
    approximate).
    """
    if not (0.0 < test_fraction < 1.0):
        raise ValueError("test_fraction must be in (0, 1)")
    labeled = corpus.labeled()
    if len(labeled) != len(corpus.utterances):
        raise ValueError("split requires a fully labeled corpus")

    rng = np.random.default_rng(seed)
    if by_speaker:
        return _split_by_speaker(labeled, test_fraction, rng)

    by_class: dict[EmotionLabel, list[Utterance]] = defaultdict(list)
    for u in labeled:
        by_class[u.label].append(u)

    train: list[Utterance] = []
    test: list[Utterance] = []
    for label in sorted(by_class):
        members = sorted(by_class[label], key=lambda u: u.id)
        if len(members) < 2:
            raise ValueError(f"class {label.label_name} has {len(members)} utterance(s), cannot stratify")
        n_test = min(max(1, _round_half_up(len(members) * test_fraction)), len(members) - 1)
        order = rng.permutation(len(members))
        test.extend(members[i] for i in order[:n_test])
        train.extend(members[i] for i in order[n_test:])
    return train, test


def _split_by_speaker(labeled, test_fraction, rng):
    speakers = sorted({u.speaker_id or u.id for u in labeled})
    if len(speakers) < 2:
        raise ValueError("speaker-independent split needs at least 2 speakers")
    order = rng.permutation(len(speakers))
    target = max(1, _round_half_up(len(labeled) * test_fraction))
    test_speakers: set[str] = set()
    count = 0
    per_speaker = Counter(u.speaker_id or u.id for u in labeled)
    for i in order:
        if count >= target or len(test_speakers) == len(speakers) - 1:
            break
        test_speakers.add(speakers[i])
        count += per_speaker[speakers[i]]
    test = [u for u in labeled if (u.speaker_id or u.id) in test_speakers]
    train = [u for u in labeled if (u.speaker_id or u.id) not in test_speakers]
    return train, test


def balance_classes(
    train: list[Utterance],
    rng_seed: int,
    warp_range: tuple[float, float] = VTLP_BALANCE_RANGE,
) -> list[Utterance]:
    """Top up every class to the majority-class count with VTLP copies.

    Copies reference the source clip's audio and carry a warp factor drawn
    uniformly from warp_range; the warp is applied by the feature pipeline
    when the clip is loaded. Original utterances are never removed.
    """
    if not train:
        raise ValueError("empty training set")
    by_class: dict[EmotionLabel, list[Utterance]] = defaultdict(list)
    for u in train:
        if u.label is None:
            raise ValueError(f"unlabeled utterance {u.id!r} cannot be balanced")
        by_class[u.label].append(u)
    if len(by_class) < len(EmotionLabel):
        missing = [l.label_name for l in EmotionLabel if l not in by_class]
        raise ValueError(f"empty class(es): {missing}")

    rng = np.random.default_rng(rng_seed)
    target = max(len(v) for v in by_class.values())
    out = list(train)
    lo, hi = warp_range
    for label in sorted(by_class):
        members = sorted(by_class[label], key=lambda u: u.id)
        deficit = target - len(members)
        for k in range(deficit):
            source = members[int(rng.integers(len(members)))]
            alpha = float(rng.uniform(lo, hi))
            out.append(source.with_augmentation(f"{source.id}-aug{k}", alpha))
    return out


def compose_domains(
    source: Corpus,
    target: Corpus,
    scheme: CompositionScheme,
    seed: int,
    test_fraction: float = 0.2,
) -> DomainAssignment:
    """Assemble the pretraining / RL / test sets from a source and a target
    corpus.

    Separate: pretrain on all of source-train, adapt on target-train.
    Mixed50: pretrain on a random half of source-train, adapt on the other
    half plus target-train. Both schemes test on source-test + target-test.
    """
    if source.corpus_id == target.corpus_id:
        raise ValueError("source and target must be distinct corpora")
    scheme = CompositionScheme(scheme)
    seeds = np.random.SeedSequence(seed).generate_state(3)
    s_train, s_test = split_corpus(source, test_fraction, int(seeds[0]))
    t_train, t_test = split_corpus(target, test_fraction, int(seeds[1]))
    test = tuple(s_test) + tuple(t_test)

    if scheme is CompositionScheme.SEPARATE:
        return DomainAssignment(tuple(s_train), tuple(t_train), test, scheme)

    rng = np.random.default_rng(int(seeds[2]))
    order = rng.permutation(len(s_train))
    half = len(s_train) // 2
    pretrain = tuple(s_train[i] for i in order[:half])
    leftover = tuple(s_train[i] for i in order[half:])
    return DomainAssignment(pretrain, leftover + tuple(t_train), test, scheme)
