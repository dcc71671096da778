from rlser.dsp.augment import mix_noise, vtlp
from rlser.dsp.mfcc import dct_matrix, mel_filterbank, mfcc
from rlser.dsp.params import (
    CLIP_SAMPLES,
    CLIP_SECONDS,
    EXPECTED_FRAMES,
    HOP_LENGTH,
    N_FFT,
    N_MELS,
    N_MFCC,
    SAMPLE_RATE,
)
from rlser.dsp.pipeline import energy_onset, extract_features, fix_duration, resample
from rlser.dsp.stft import hann_window, istft, stft
from rlser.dsp.wav import WavError, Waveform, decode_wav, encode_wav, read_wav, write_wav

__all__ = [
    "CLIP_SAMPLES",
    "CLIP_SECONDS",
    "EXPECTED_FRAMES",
    "HOP_LENGTH",
    "N_FFT",
    "N_MELS",
    "N_MFCC",
    "SAMPLE_RATE",
    "WavError",
    "Waveform",
    "decode_wav",
    "dct_matrix",
    "encode_wav",
    "energy_onset",
    "extract_features",
    "fix_duration",
    "hann_window",
    "istft",
    "mel_filterbank",
    "mfcc",
    "mix_noise",
    "read_wav",
    "resample",
    "stft",
    "vtlp",
    "write_wav",
]
