"""Short-time Fourier analysis/synthesis used by the MFCC and VTLP paths.

Framing is centered: the signal is reflect-padded by n_fft // 2 on both ends,
so a signal of L samples yields 1 + L // hop frames. Synthesis uses weighted
overlap-add with the same window, normalized by the accumulated squared
window, which reconstructs the input to float precision.
"""

from __future__ import annotations

import numpy as np

from rlser.dsp.params import HOP_LENGTH, N_FFT


def hann_window(n: int) -> np.ndarray:
    # periodic variant, as used by FFT analysis everywhere
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def frame_count(n_samples: int, hop: int = HOP_LENGTH) -> int:
    return 1 + n_samples // hop


def stft(x: np.ndarray, n_fft: int = N_FFT, hop: int = HOP_LENGTH) -> np.ndarray:
    """Complex spectrogram of shape (1 + n_fft//2, n_frames)."""
    x = np.asarray(x, dtype=np.float64)
    pad = n_fft // 2
    padded = np.pad(x, pad, mode="reflect")
    n_frames = 1 + (len(padded) - n_fft) // hop
    strides = (padded.strides[0] * hop, padded.strides[0])
    frames = np.lib.stride_tricks.as_strided(padded, shape=(n_frames, n_fft), strides=strides)
    return np.fft.rfft(frames * hann_window(n_fft), axis=1).T


def istft(spec: np.ndarray, n_samples: int, n_fft: int = N_FFT, hop: int = HOP_LENGTH) -> np.ndarray:
    """Invert `stft`, returning exactly n_samples samples."""
    window = hann_window(n_fft)
    n_frames = spec.shape[1]
    total = n_fft + hop * (n_frames - 1)
    num = np.zeros(total)
    den = np.zeros(total)
    frames = np.fft.irfft(spec.T, n=n_fft, axis=1)
    for i in range(n_frames):
        start = i * hop
        num[start : start + n_fft] += frames[i] * window
        den[start : start + n_fft] += window * window
    safe = den > 1e-10
    num[safe] /= den[safe]
    pad = n_fft // 2
    out = num[pad : pad + n_samples]
    if len(out) < n_samples:
        out = np.pad(out, (0, n_samples - len(out)))
    return out
