"""Utterance -> feature-matrix pipeline with caching.

The RL state for an utterance is deterministic within a run: VTLP warp
factors ride on the utterance record, and noise (when configured) picks its
bed and circular offset from an rng seeded per utterance, so revisits see the
identical matrix and the state set stays finite (which the trainer's
target-Q cache relies on).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from rlser.corpus.manifest import Corpus, Utterance
from rlser.dsp.augment import mix_noise, vtlp
from rlser.dsp.params import SAMPLE_RATE
from rlser.dsp.pipeline import fix_duration, resample
from rlser.dsp.mfcc import mfcc
from rlser.dsp.wav import Waveform, read_wav


@dataclass(frozen=True)
class NoiseConfig:
    corpus: Corpus  # any mono WAV corpus serves as noise beds
    snr_db: float = -5.0


class FeatureCache:
    """Lazily computes and retains the (40, 87) state matrix per utterance."""

    def __init__(self, noise: NoiseConfig | None = None, seed: int = 0):
        self.noise = noise
        self.seed = seed
        self._cache: dict[str, np.ndarray] = {}
        self._noise_waves: dict[str, Waveform] = {}

    def state_key(self, utterance: Utterance) -> str:
        key = utterance.qualified_id
        if utterance.vtlp_alpha is not None:
            key += f"~a{utterance.vtlp_alpha:.6f}"
        if self.noise is not None:
            key += "+noise"
        return key

    def _noise_wave(self, bed: Utterance) -> Waveform:
        wave = self._noise_waves.get(bed.qualified_id)
        if wave is None:
            wave = resample(read_wav(bed.audio_path), SAMPLE_RATE)
            self._noise_waves[bed.qualified_id] = wave
        return wave

    def prepared_waveform(self, utterance: Utterance) -> Waveform:
        """Everything before MFCC: resample, warp, fix duration, mix noise."""
        wave = resample(read_wav(utterance.audio_path), SAMPLE_RATE)
        if utterance.vtlp_alpha is not None:
            wave = vtlp(wave, utterance.vtlp_alpha)
        wave = fix_duration(wave)
        if self.noise is not None:
            rng = np.random.default_rng(
                np.random.SeedSequence([self.seed, hash(utterance.qualified_id) & 0x7FFFFFFF])
            )
            beds = self.noise.corpus.utterances
            bed = beds[int(rng.integers(len(beds)))]
            wave = mix_noise(wave, self._noise_wave(bed), self.noise.snr_db, rng=rng)
        return wave

    def get(self, utterance: Utterance) -> np.ndarray:
        key = self.state_key(utterance)
        feats = self._cache.get(key)
        if feats is None:
            feats = mfcc(self.prepared_waveform(utterance))
            self._cache[key] = feats
        return feats

    def warm(self, utterances) -> None:
        for u in utterances:
            self.get(u)
