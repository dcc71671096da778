import json
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rlser.corpus import (
    CompositionScheme,
    Corpus,
    DomainShift,
    ManifestError,
    SyntheticSpec,
    Utterance,
    balance_classes,
    compose_domains,
    generate_synthetic_corpus,
    load_manifest,
    save_manifest,
    split_corpus,
)
from rlser.dsp import decode_wav
from rlser.labels import EmotionLabel


def make_utterances(counts: dict[EmotionLabel, int], corpus_id="c") -> list[Utterance]:
    out = []
    for label, n in counts.items():
        for k in range(n):
            out.append(
                Utterance(
                    id=f"{label.label_name[:3]}{k:03d}",
                    audio_path=f"/nonexistent/{label.label_name}{k}.wav",
                    label=label,
                    corpus_id=corpus_id,
                    speaker_id=f"s{k % 3}",
                )
            )
    return out


def write_manifest(tmp_path, records):
    wav = tmp_path / "a.wav"
    if not wav.exists():
        from rlser.dsp import Waveform, write_wav

        write_wav(wav, Waveform(np.full(1000, 0.1), 22050))
    path = tmp_path / "manifest.jsonl"
    with open(path, "w") as fh:
        for rec in records:
            if isinstance(rec, str):
                fh.write(rec + "\n")
            else:
                rec.setdefault("path", "a.wav")
                fh.write(json.dumps(rec) + "\n")
    return path


class TestLabels:
    def test_exactly_four_with_stable_codes(self):
        assert [l.label_name for l in EmotionLabel] == ["happiness", "sadness", "anger", "neutral"]
        assert [int(l) for l in EmotionLabel] == [0, 1, 2, 3]

    def test_round_trip(self):
        for l in EmotionLabel:
            assert EmotionLabel.from_name(l.label_name) is l

    def test_unknown_label(self):
        with pytest.raises(ValueError, match="fear"):
            EmotionLabel.from_name("fear")


class TestManifest:
    def test_loads_four_records(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [{"id": f"u{i}", "label": l.label_name, "corpus_id": "c"} for i, l in enumerate(EmotionLabel)],
        )
        corpus = load_manifest(path)
        assert len(corpus) == 4
        assert [u.label for u in corpus.utterances] == list(EmotionLabel)

    def test_empty_file_is_an_error(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(ManifestError, match="empty corpus"):
            load_manifest(path)

    def test_unknown_label_names_the_offender_and_line(self, tmp_path):
        path = write_manifest(
            tmp_path,
            [
                {"id": "u0", "label": "anger", "corpus_id": "c"},
                {"id": "u1", "label": "fear", "corpus_id": "c"},
            ],
        )
        with pytest.raises(ManifestError, match="line 2.*fear"):
            load_manifest(path)

    def test_malformed_record_reports_line(self, tmp_path):
        path = write_manifest(tmp_path, [{"id": "u0", "label": "anger", "corpus_id": "c"}, "{not json"])
        with pytest.raises(ManifestError, match="line 2"):
            load_manifest(path)

    def test_duplicate_id_rejected(self, tmp_path):
        recs = [{"id": "dup", "label": "anger", "corpus_id": "c"}] * 2
        path = write_manifest(tmp_path, recs)
        with pytest.raises(ManifestError, match="dup"):
            load_manifest(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_manifest(tmp_path / "nope.jsonl")

    def test_missing_audio_rejected(self, tmp_path):
        path = write_manifest(tmp_path, [{"id": "u0", "label": "anger", "corpus_id": "c", "path": "gone.wav"}])
        with pytest.raises(ManifestError, match="missing"):
            load_manifest(path)

    def test_round_trip_preserves_ids_labels_order(self, mini_source_corpus, tmp_path):
        out = tmp_path / "again.jsonl"
        save_manifest(mini_source_corpus, out)
        back = load_manifest(out)
        assert [u.id for u in back.utterances] == [u.id for u in mini_source_corpus.utterances]
        assert [u.label for u in back.utterances] == [u.label for u in mini_source_corpus.utterances]


class TestSplit:
    def test_25_per_class_fraction_02(self):
        utts = make_utterances({l: 25 for l in EmotionLabel})
        corpus = Corpus("x", tuple(utts), 22050)
        train, test = split_corpus(corpus, 0.2, seed=7)
        assert len(train) == 80 and len(test) == 20
        per_class = Counter(u.label for u in test)
        assert all(v == 5 for v in per_class.values())

    def test_deterministic_for_fixed_seed(self):
        corpus = Corpus("x", tuple(make_utterances({l: 10 for l in EmotionLabel})), 22050)
        a = split_corpus(corpus, 0.2, seed=3)
        b = split_corpus(corpus, 0.2, seed=3)
        assert [u.id for u in a[0]] == [u.id for u in b[0]]
        assert [u.id for u in a[1]] == [u.id for u in b[1]]

    def test_stratified_rounding_10_10_10_13(self):
        counts = dict(zip(EmotionLabel, [10, 10, 10, 13]))
        corpus = Corpus("x", tuple(make_utterances(counts)), 22050)
        _, test = split_corpus(corpus, 0.2, seed=1)
        per_class = {l.label_name: c for l, c in Counter(u.label for u in test).items()}
        # max(1, round(count * 0.2)) per class: 2, 2, 2, 3 (2.6 rounds up)
        assert per_class == {"happiness": 2, "sadness": 2, "anger": 2, "neutral": 3}

    def test_tiny_class_rejected(self):
        counts = dict(zip(EmotionLabel, [5, 5, 5, 1]))
        corpus = Corpus("x", tuple(make_utterances(counts)), 22050)
        with pytest.raises(ValueError, match="neutral"):
            split_corpus(corpus, 0.2, seed=1)

    def test_fraction_bounds(self):
        corpus = Corpus("x", tuple(make_utterances({l: 4 for l in EmotionLabel})), 22050)
        for bad in (0.0, 1.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                split_corpus(corpus, bad, seed=0)

    @settings(max_examples=25, deadline=None)
    @given(
        counts=st.lists(st.integers(2, 40), min_size=4, max_size=4),
        fraction=st.floats(0.05, 0.5),
        seed=st.integers(0, 2**31 - 1),
    )
    def test_split_is_disjoint_and_exhaustive(self, counts, fraction, seed):
        corpus = Corpus("x", tuple(make_utterances(dict(zip(EmotionLabel, counts)))), 22050)
        train, test = split_corpus(corpus, fraction, seed)
        train_ids = {u.id for u in train}
        test_ids = {u.id for u in test}
        assert not (train_ids & test_ids)
        assert train_ids | test_ids == {u.id for u in corpus.utterances}

    def test_by_speaker_puts_whole_speakers_aside(self):
        corpus = Corpus("x", tuple(make_utterances({l: 9 for l in EmotionLabel})), 22050)
        train, test = split_corpus(corpus, 0.3, seed=5, by_speaker=True)
        train_speakers = {u.speaker_id for u in train}
        test_speakers = {u.speaker_id for u in test}
        assert not (train_speakers & test_speakers)


class TestBalance:
    def test_already_balanced_unchanged(self):
        utts = make_utterances({l: 10 for l in EmotionLabel})
        out = balance_classes(utts, rng_seed=0)
        assert out == utts

    def test_two_augmented_happiness_added(self):
        counts = dict(zip(EmotionLabel, [8, 10, 10, 10]))
        utts = make_utterances(counts)
        out = balance_classes(utts, rng_seed=0)
        added = [u for u in out if u.augmented]
        assert len(added) == 2
        assert all(u.label is EmotionLabel.HAPPINESS for u in added)
        assert all(u.vtlp_alpha is not None and 0.9 <= u.vtlp_alpha <= 1.1 for u in added)
        assert len({u.id for u in out}) == len(out)

    @settings(max_examples=25, deadline=None)
    @given(counts=st.lists(st.integers(1, 30), min_size=4, max_size=4), seed=st.integers(0, 1000))
    def test_output_histogram_uniform(self, counts, seed):
        utts = make_utterances(dict(zip(EmotionLabel, counts)))
        out = balance_classes(utts, rng_seed=seed)
        hist = Counter(u.label for u in out)
        assert set(hist.values()) == {max(counts)}
        # originals all kept
        assert {u.id for u in utts} <= {u.id for u in out}

    def test_empty_class_rejected(self):
        utts = make_utterances(dict(zip(EmotionLabel, [3, 3, 3, 0])))
        with pytest.raises(ValueError, match="neutral"):
            balance_classes(utts, rng_seed=0)


class TestComposeDomains:
    def test_separate_sizes(self, mini_source_corpus, mini_target_corpus):
        da = compose_domains(mini_source_corpus, mini_target_corpus, CompositionScheme.SEPARATE, seed=5)
        # 12 per class, 20% test -> 2 or 3 test per class
        assert len(da.pretrain_set) == len(mini_source_corpus) - 8
        assert len(da.rl_set) == len(mini_target_corpus) - 8
        assert len(da.test_set) == 16

    def test_mixed50_pretrain_is_half_of_source_train(self, mini_source_corpus, mini_target_corpus):
        da = compose_domains(mini_source_corpus, mini_target_corpus, "mixed50", seed=5)
        source_train = len(mini_source_corpus) - 8
        assert len(da.pretrain_set) == source_train // 2
        assert len(da.rl_set) == (source_train - source_train // 2) + (len(mini_target_corpus) - 8)

    def test_disjoint_over_random_seeds(self, mini_source_corpus, mini_target_corpus):
        for seed in range(6):
            for scheme in CompositionScheme:
                da = compose_domains(mini_source_corpus, mini_target_corpus, scheme, seed=seed)
                ids = [
                    {u.qualified_id for u in da.pretrain_set},
                    {u.qualified_id for u in da.rl_set},
                    {u.qualified_id for u in da.test_set},
                ]
                assert not (ids[0] & ids[1]) and not (ids[0] & ids[2]) and not (ids[1] & ids[2])

    def test_same_corpus_rejected(self, mini_source_corpus):
        with pytest.raises(ValueError):
            compose_domains(mini_source_corpus, mini_source_corpus, "separate", seed=0)


class TestSynthetic:
    def test_counts_and_playability(self, mini_source_corpus):
        assert len(mini_source_corpus) == 48
        w = decode_wav(mini_source_corpus.utterances[0].audio_path.read_bytes())
        assert w.sample_rate_hz == 22050
        assert len(w) == 44100

    def test_same_seed_byte_identical(self, tmp_path):
        spec = SyntheticSpec(corpus_id="d", clips_per_class=2)
        a = generate_synthetic_corpus(spec, 9, tmp_path / "a")
        b = generate_synthetic_corpus(spec, 9, tmp_path / "b")
        for ua, ub in zip(a.utterances, b.utterances):
            assert ua.audio_path.read_bytes() == ub.audio_path.read_bytes()

    def test_shifted_corpus_differs(self, tmp_path):
        base = SyntheticSpec(corpus_id="d", clips_per_class=1)
        shifted = SyntheticSpec(
            corpus_id="d", clips_per_class=1, shift=DomainShift(pitch_semitones=2.0, texture="rumble")
        )
        a = generate_synthetic_corpus(base, 9, tmp_path / "a")
        b = generate_synthetic_corpus(shifted, 9, tmp_path / "b")
        assert a.utterances[0].audio_path.read_bytes() != b.utterances[0].audio_path.read_bytes()

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError):
            SyntheticSpec(corpus_id="x", clips_per_class=0)
        with pytest.raises(ValueError):
            DomainShift(texture="traffic")
