"""Desk-scale synthetic emotion corpora.

Real emotion corpora are licensed and cannot ship with the engine, so tests
and the acceptance suite run on generated audio: each class is a harmonic
tone with a class-specific fundamental, spectral decay, and amplitude
envelope, plus per-clip jitter so classes have intra-class variance. A
DomainShift (global pitch offset, envelope tempo change, background texture)
applied to a second corpus emulates the source -> target distribution gap.

Generation is deterministic: clip audio depends only on (seed, class, index,
spec), so the same spec and seed reproduce byte-identical WAV files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from rlser.corpus.manifest import Corpus, Utterance, save_manifest
from rlser.dsp.wav import Waveform, write_wav
from rlser.labels import EmotionLabel


@dataclass(frozen=True)
class DomainShift:
    """Global acoustic offsets that turn one synthetic corpus into a shifted
    domain of the same task."""

    pitch_semitones: float = 0.0
    tempo_factor: float = 1.0
    texture: str | None = None  # None, "rumble" (low band) or "hiss" (high band)
    texture_snr_db: float = 10.0

    def __post_init__(self):
        if self.tempo_factor <= 0:
            raise ValueError("tempo_factor must be positive")
        if self.texture not in (None, "rumble", "hiss"):
            raise ValueError(f"unknown texture {self.texture!r}")


@dataclass(frozen=True)
class SyntheticSpec:
    corpus_id: str
    clips_per_class: int = 50
    duration_seconds: float = 2.0
    sample_rate_hz: int = 22050
    n_speakers: int = 5
    shift: DomainShift = field(default_factory=DomainShift)

    def __post_init__(self):
        if self.clips_per_class < 1:
            raise ValueError("clips_per_class must be >= 1")
        if self.duration_seconds <= 0:
            raise ValueError("duration must be positive")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")
        if self.n_speakers < 1:
            raise ValueError("n_speakers must be >= 1")


# fundamental (Hz), harmonic decay exponent, envelope kind, envelope rate (Hz)
_CLASS_ACOUSTICS = {
    EmotionLabel.HAPPINESS: (330.0, 0.9, "tremolo", 6.0),
    EmotionLabel.SADNESS: (110.0, 2.2, "swell", 0.5),
    EmotionLabel.ANGER: (220.0, 0.6, "rough", 28.0),
    EmotionLabel.NEUTRAL: (165.0, 1.4, "flat", 1.5),
}

_MAX_HARMONICS = 20


def _envelope(kind: str, rate: float, t: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    phase = rng.uniform(0, 2 * np.pi)
    if kind == "tremolo":
        return 1.0 + 0.4 * np.sin(2 * np.pi * rate * t + phase)
    if kind == "swell":
        duration = t[-1] if len(t) > 1 else 1.0
        return 0.25 + 0.75 * np.sin(np.pi * np.clip(t / duration, 0, 1)) ** 1.5
    if kind == "rough":
        return 1.0 + 0.5 * np.sin(2 * np.pi * rate * t + phase)
    return 1.0 + 0.05 * np.sin(2 * np.pi * rate * t + phase)


def _texture_noise(kind: str, n: int, sr: int, rng: np.random.Generator) -> np.ndarray:
    white = rng.normal(0.0, 1.0, n)
    spec = np.fft.rfft(white)
    freqs = np.fft.rfftfreq(n, 1.0 / sr)
    if kind == "rumble":
        mask = freqs < 300.0
    else:  # hiss
        mask = (freqs > 3000.0) & (freqs < 6000.0)
    shaped = np.fft.irfft(spec * mask, n=n)
    rms = np.sqrt(np.mean(shaped**2))
    return shaped / max(rms, 1e-12)


def _render_clip(
    label: EmotionLabel,
    spec: SyntheticSpec,
    speaker_mult: float,
    rng: np.random.Generator,
) -> np.ndarray:
    sr = spec.sample_rate_hz
    n = int(round(spec.duration_seconds * sr))
    t = np.arange(n) / sr
    base_f0, decay, env_kind, env_rate = _CLASS_ACOUSTICS[label]

    f0 = (
        base_f0
        * speaker_mult
        * 2.0 ** (rng.uniform(-0.7, 0.7) / 12.0)
        * 2.0 ** (spec.shift.pitch_semitones / 12.0)
    )
    decay = decay + rng.uniform(-0.1, 0.1)

    x = np.zeros(n)
    for k in range(1, _MAX_HARMONICS + 1):
        fk = k * f0
        if fk >= 0.45 * sr:
            break
        x += (1.0 / k**decay) * np.sin(2 * np.pi * fk * t + rng.uniform(0, 2 * np.pi))
    if env_kind == "rough":
        x = np.tanh(2.0 * x) / np.tanh(2.0)

    x *= _envelope(env_kind, env_rate * spec.shift.tempo_factor * rng.uniform(0.9, 1.1), t, rng)

    rms = np.sqrt(np.mean(x**2))
    # mild per-clip noise floor so classes are not perfectly clean
    x += rng.normal(0.0, 1.0, n) * (rms * 10.0 ** (-28.0 / 20.0))

    if spec.shift.texture is not None:
        noise = _texture_noise(spec.shift.texture, n, sr, rng)
        x += noise * (rms * 10.0 ** (-spec.shift.texture_snr_db / 20.0))

    peak = np.max(np.abs(x))
    return x / peak * rng.uniform(0.3, 0.5)


def generate_noise_corpus(
    corpus_id: str,
    seed: int,
    out_dir: str | Path,
    n_beds: int = 2,
    seconds: float = 4.0,
    kind: str = "rumble",
    sample_rate_hz: int = 22050,
) -> Corpus:
    """Unlabeled colored-noise beds usable wherever a background-noise corpus
    is expected (stands in for real environment recordings)."""
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)
    n = int(round(seconds * sample_rate_hz))
    utterances = []
    for i in range(n_beds):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB0, i]))
        shaped = _texture_noise(kind, n, sample_rate_hz, rng)
        samples = shaped / np.max(np.abs(shaped)) * 0.5
        path = audio_dir / f"{kind}{i}.wav"
        write_wav(path, Waveform(samples, sample_rate_hz))
        utterances.append(Utterance(id=f"{kind}{i}", audio_path=path, label=None, corpus_id=corpus_id))
    corpus = Corpus(corpus_id, tuple(utterances), sample_rate_hz)
    save_manifest(corpus, out_dir / "manifest.jsonl")
    return corpus


def generate_synthetic_corpus(spec: SyntheticSpec, seed: int, out_dir: str | Path) -> Corpus:
    """Render the corpus to out_dir (audio/ + manifest.jsonl) and return it."""
    out_dir = Path(out_dir)
    audio_dir = out_dir / "audio"
    audio_dir.mkdir(parents=True, exist_ok=True)

    speaker_mults = [
        float(2.0 ** (np.random.default_rng(np.random.SeedSequence([seed, 0x5EED, i])).uniform(-1.0, 1.0) / 12.0))
        for i in range(spec.n_speakers)
    ]

    utterances: list[Utterance] = []
    for label in EmotionLabel:
        for idx in range(spec.clips_per_class):
            rng = np.random.default_rng(np.random.SeedSequence([seed, int(label), idx]))
            speaker = idx % spec.n_speakers
            samples = _render_clip(label, spec, speaker_mults[speaker], rng)
            clip_id = f"{label.label_name[:3]}{idx:04d}"
            path = audio_dir / f"{clip_id}.wav"
            write_wav(path, Waveform(samples, spec.sample_rate_hz))
            utterances.append(
                Utterance(
                    id=clip_id,
                    audio_path=path,
                    label=label,
                    corpus_id=spec.corpus_id,
                    speaker_id=f"spk{speaker}",
                )
            )

    corpus = Corpus(spec.corpus_id, tuple(utterances), spec.sample_rate_hz)
    save_manifest(corpus, out_dir / "manifest.jsonl")
    return corpus
