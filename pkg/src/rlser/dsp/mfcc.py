"""MFCC extraction producing the 40 x 87 model input.

Pipeline: power spectrogram (Hann, 2048/512, centered) -> 128-band mel
filterbank (Slaney scale, area-normalized triangles) -> 10*log10 with a 1e-10
floor -> orthonormal DCT-II along the mel axis -> first 40 coefficients.

Committed golden vectors (tests/golden/*.mfcc.f32) pin this pipeline
bit-comparably; regenerate them with tools/make_mfcc_golden.py.
"""

from __future__ import annotations

import numpy as np

from rlser.dsp.params import (
    EXPECTED_FRAMES,
    HOP_LENGTH,
    LOG_FLOOR,
    N_FFT,
    N_MELS,
    N_MFCC,
    SAMPLE_RATE,
)
from rlser.dsp.stft import stft
from rlser.dsp.wav import Waveform

_MEL_BREAK_HZ = 1000.0
_MEL_BREAK = 15.0  # mels at the 1 kHz linear/log boundary (1000 / (200/3))
_LINEAR_MEL_PER_HZ = 3.0 / 200.0
_LOG_STEP = np.log(6.4) / 27.0


def hz_to_mel(f):
    """Slaney mel scale: linear below 1 kHz, logarithmic above."""
    f = np.asarray(f, dtype=np.float64)
    mel = f * _LINEAR_MEL_PER_HZ
    above = f >= _MEL_BREAK_HZ
    if np.any(above):
        mel = np.where(above, _MEL_BREAK + np.log(np.maximum(f, _MEL_BREAK_HZ) / _MEL_BREAK_HZ) / _LOG_STEP, mel)
    return mel


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    f = m / _LINEAR_MEL_PER_HZ
    above = m >= _MEL_BREAK
    if np.any(above):
        f = np.where(above, _MEL_BREAK_HZ * np.exp(_LOG_STEP * (m - _MEL_BREAK)), f)
    return f


def mel_filterbank(
    sr: int = SAMPLE_RATE,
    n_fft: int = N_FFT,
    n_mels: int = N_MELS,
    fmin: float = 0.0,
    fmax: float | None = None,
) -> np.ndarray:
    """Triangular mel filter weights of shape (n_mels, 1 + n_fft//2)."""
    if fmax is None:
        fmax = sr / 2.0
    edges = mel_to_hz(np.linspace(hz_to_mel(fmin), hz_to_mel(fmax), n_mels + 2))
    fft_freqs = np.linspace(0.0, sr / 2.0, 1 + n_fft // 2)

    lower = (fft_freqs[None, :] - edges[:-2, None]) / (edges[1:-1] - edges[:-2])[:, None]
    upper = (edges[2:, None] - fft_freqs[None, :]) / (edges[2:] - edges[1:-1])[:, None]
    weights = np.maximum(0.0, np.minimum(lower, upper))

    # Slaney area normalization: each triangle integrates to ~2 / bandwidth
    weights *= (2.0 / (edges[2:] - edges[:-2]))[:, None]
    return weights


def dct_matrix(n_out: int, n_in: int) -> np.ndarray:
    """Orthonormal DCT-II rows (the scipy norm='ortho' convention)."""
    n = np.arange(n_in)
    k = np.arange(n_out)[:, None]
    mat = 2.0 * np.cos(np.pi * k * (2 * n + 1) / (2.0 * n_in))
    mat[0] *= np.sqrt(1.0 / (4.0 * n_in))
    mat[1:] *= np.sqrt(1.0 / (2.0 * n_in))
    return mat


_FILTERBANK: np.ndarray | None = None
_DCT: np.ndarray | None = None


def _analysis_matrices():
    global _FILTERBANK, _DCT
    if _FILTERBANK is None:
        _FILTERBANK = mel_filterbank()
        _DCT = dct_matrix(N_MFCC, N_MELS)
    return _FILTERBANK, _DCT


def mfcc(w: Waveform, expected_frames: int | None = EXPECTED_FRAMES) -> np.ndarray:
    """MFCC matrix (n_mfcc, n_frames) as float32.

    The waveform must already be at 22050 Hz; pass it through fix_duration
    first so the frame count matches the model input. Set expected_frames to
    None to skip the duration check.
    """
    if w.sample_rate_hz != SAMPLE_RATE:
        raise ValueError(f"mfcc expects {SAMPLE_RATE} Hz input, got {w.sample_rate_hz} Hz (resample first)")
    fb, dct = _analysis_matrices()
    power = np.abs(stft(w.samples, N_FFT, HOP_LENGTH)) ** 2
    mel_db = 10.0 * np.log10(np.maximum(fb @ power, LOG_FLOOR))
    coeffs = dct @ mel_db
    if expected_frames is not None and coeffs.shape[1] != expected_frames:
        raise ValueError(
            f"wrong duration: got {coeffs.shape[1]} frames, expected {expected_frames} (use fix_duration)"
        )
    return coeffs.astype(np.float32)
