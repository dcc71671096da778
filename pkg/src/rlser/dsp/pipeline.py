"""Waveform conditioning: resampling and duration fixing, plus the
end-to-end feature chain used by environments and the service."""

from __future__ import annotations

import math

import numpy as np
from scipy.signal import resample_poly

from rlser.dsp.mfcc import mfcc
from rlser.dsp.params import (
    CLIP_SECONDS,
    ONSET_FRAME,
    ONSET_RMS_FRACTION,
    SAMPLE_RATE,
)
from rlser.dsp.wav import Waveform


def resample(w: Waveform, target_hz: int) -> Waveform:
    """Band-limited (polyphase) resampling to target_hz.

    Output length is round(len * target / source); identical rates return the
    input unchanged.
    """
    if target_hz <= 0:
        raise ValueError("target sample rate must be positive")
    if target_hz == w.sample_rate_hz:
        return w
    g = math.gcd(target_hz, w.sample_rate_hz)
    up, down = target_hz // g, w.sample_rate_hz // g
    out = resample_poly(w.samples, up, down)
    n = int(round(len(w.samples) * target_hz / w.sample_rate_hz))
    return Waveform(out[:n] if len(out) >= n else np.pad(out, (0, n - len(out))), target_hz)


def energy_onset(w: Waveform, frame: int = ONSET_FRAME, rms_fraction: float = ONSET_RMS_FRACTION) -> int:
    """Sample index of the first frame whose RMS exceeds rms_fraction of the
    peak amplitude; 0 for silent input."""
    x = w.samples
    peak = np.max(np.abs(x))
    if peak <= 0.0:
        return 0
    n_frames = len(x) // frame
    if n_frames == 0:
        return 0
    framed = x[: n_frames * frame].reshape(n_frames, frame)
    rms = np.sqrt(np.mean(framed * framed, axis=1))
    hot = np.nonzero(rms > rms_fraction * peak)[0]
    return int(hot[0]) * frame if hot.size else 0


def fix_duration(w: Waveform, seconds: float = CLIP_SECONDS) -> Waveform:
    """Force the clip to exactly round(seconds * rate) samples.

    Longer clips are cut starting at the energy onset (so leading silence does
    not eat the window); shorter clips are zero-padded at the end.
    """
    if seconds <= 0:
        raise ValueError("target duration must be positive")
    n_target = int(round(seconds * w.sample_rate_hz))
    x = w.samples
    if len(x) == n_target:
        return w
    if len(x) < n_target:
        return Waveform(np.pad(x, (0, n_target - len(x))), w.sample_rate_hz)
    start = min(energy_onset(w), len(x) - n_target)
    return Waveform(x[start : start + n_target], w.sample_rate_hz)


def extract_features(w: Waveform) -> np.ndarray:
    """resample -> fix_duration -> mfcc; the (40, 87) float32 state matrix."""
    return mfcc(fix_duration(resample(w, SAMPLE_RATE)))
