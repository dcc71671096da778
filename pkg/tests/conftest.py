import numpy as np
import pytest

from rlser.corpus import DomainShift, SyntheticSpec, generate_synthetic_corpus
from rlser.dsp.wav import Waveform

GOLDEN_DIR = "tests/golden"


@pytest.fixture(scope="session")
def mini_source_corpus(tmp_path_factory):
    """Small clean corpus (4 classes x 12 clips) shared across tests."""
    spec = SyntheticSpec(corpus_id="minisrc", clips_per_class=12, n_speakers=3)
    return generate_synthetic_corpus(spec, seed=101, out_dir=tmp_path_factory.mktemp("minisrc"))


@pytest.fixture(scope="session")
def mini_target_corpus(tmp_path_factory):
    """Domain-shifted twin of the mini source corpus."""
    spec = SyntheticSpec(
        corpus_id="minitgt",
        clips_per_class=12,
        n_speakers=3,
        shift=DomainShift(pitch_semitones=2.0, tempo_factor=1.15, texture="rumble", texture_snr_db=10.0),
    )
    return generate_synthetic_corpus(spec, seed=202, out_dir=tmp_path_factory.mktemp("minitgt"))


@pytest.fixture()
def sine_wave():
    t = np.arange(44100) / 22050
    return Waveform(0.5 * np.sin(2 * np.pi * 440.0 * t), 22050)


def speechlike_noise(seed: int, n: int = 44100, sr: int = 22050) -> Waveform:
    """Low-passed noise with a rough speech-band tilt, for augmentation tests."""
    rng = np.random.default_rng(seed)
    white = rng.normal(0.0, 1.0, n)
    kernel = np.exp(-np.arange(24) / 6.0)
    colored = np.convolve(white, kernel / kernel.sum(), mode="same")
    return Waveform(colored / np.max(np.abs(colored)) * 0.6, sr)


def tone_wav_bytes(freq: float = 440.0, seconds: float = 2.0, sr: int = 22050, amp: float = 0.4) -> bytes:
    from rlser.dsp import encode_wav

    t = np.arange(int(seconds * sr)) / sr
    return encode_wav(Waveform(amp * np.sin(2 * np.pi * freq * t), sr))
