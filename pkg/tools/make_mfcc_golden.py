#!/usr/bin/env python3
"""Regenerate the committed MFCC golden vectors in tests/golden/.

The reference pipeline here is deliberately independent of rlser.dsp: framing
and FFT go through scipy.signal.ShortTimeFFT, the Slaney filterbank is built
with the ramp/diff construction (rlser uses the direct triangle formula), and
the DCT is scipy.fft.dct (rlser uses an explicit cosine matrix). Golden files
are flat little-endian float32, row-major (40, 87), named <id>.mfcc.f32, with
the source clip next to them as <id>.wav.

Run from the repo root:  python tools/make_mfcc_golden.py
"""

import io
import wave
from pathlib import Path

import numpy as np
import scipy.fft
from scipy.signal import ShortTimeFFT
from scipy.signal.windows import hann

SR = 22050
N_FFT = 2048
HOP = 512
N_MELS = 128
N_MFCC = 40
CLIP = 2 * SR

OUT_DIR = Path(__file__).resolve().parent.parent / "tests" / "golden"


def slaney_mel_ramps(sr=SR, n_fft=N_FFT, n_mels=N_MELS, fmin=0.0, fmax=None):
    """Slaney-scale filterbank via the ramp construction."""
    if fmax is None:
        fmax = sr / 2.0

    def to_mel(f):
        f = np.atleast_1d(np.asarray(f, dtype=float))
        m = f * 3.0 / 200.0
        log_region = f >= 1000.0
        m[log_region] = 15.0 + np.log(f[log_region] / 1000.0) * 27.0 / np.log(6.4)
        return m

    def to_hz(m):
        m = np.atleast_1d(np.asarray(m, dtype=float))
        f = m * 200.0 / 3.0
        log_region = m >= 15.0
        f[log_region] = 1000.0 * np.exp(np.log(6.4) / 27.0 * (m[log_region] - 15.0))
        return f

    mel_f = to_hz(np.linspace(to_mel(fmin)[0], to_mel(fmax)[0], n_mels + 2))
    fftfreqs = np.fft.rfftfreq(n_fft, 1.0 / sr)
    fdiff = np.diff(mel_f)
    ramps = mel_f[:, None] - fftfreqs[None, :]
    weights = np.zeros((n_mels, len(fftfreqs)))
    for i in range(n_mels):
        lower = -ramps[i] / fdiff[i]
        upper = ramps[i + 2] / fdiff[i + 1]
        weights[i] = np.maximum(0.0, np.minimum(lower, upper))
    weights *= (2.0 / (mel_f[2 : n_mels + 2] - mel_f[:n_mels]))[:, None]
    return weights


def reference_mfcc(y):
    """Independent MFCC path: ShortTimeFFT -> ramp filterbank -> scipy DCT."""
    win = hann(N_FFT, sym=False)
    sft = ShortTimeFFT(win, hop=HOP, fs=SR, fft_mode="onesided", scale_to=None)
    # centered framing over a reflect-padded signal, matching 1 + L // hop frames
    padded = np.pad(y, N_FFT // 2, mode="reflect")
    n_frames = 1 + len(y) // HOP
    spec = sft.stft(padded, p0=0, p1=n_frames, k_offset=N_FFT // 2)
    power = np.abs(spec) ** 2
    mel = slaney_mel_ramps() @ power
    log_mel = 10.0 * np.log10(np.maximum(mel, 1e-10))
    return scipy.fft.dct(log_mel, type=2, axis=0, norm="ortho")[:N_MFCC]


def pcm16_round_trip(y, sr=SR):
    """Quantize through an actual WAV encode/decode so goldens match what a
    test reading the committed file will see."""
    pcm = np.round(np.clip(y, -1, 1) * 32767.0).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sr)
        w.writeframes(pcm.tobytes())
    wav_bytes = buf.getvalue()
    with wave.open(io.BytesIO(wav_bytes), "rb") as r:
        decoded = np.frombuffer(r.readframes(r.getnframes()), dtype="<i2")
    return wav_bytes, decoded.astype(np.float64) / 32768.0


def make_clips():
    t = np.arange(CLIP) / SR
    clips = {}

    clips["sine440"] = 0.5 * np.sin(2 * np.pi * 440.0 * t)

    harmonics = sum((0.4 / k) * np.sin(2 * np.pi * 165.0 * k * t + 0.1 * k) for k in range(1, 8))
    envelope = 0.6 + 0.4 * np.sin(2 * np.pi * 3.0 * t)
    clips["harmonic_stack"] = harmonics * envelope / np.max(np.abs(harmonics))

    rng = np.random.default_rng(20240601)
    noise = rng.normal(0.0, 1.0, CLIP)
    # crude low-pass for a speech-ish spectral tilt
    kernel = np.exp(-np.arange(32) / 8.0)
    colored = np.convolve(noise, kernel / kernel.sum(), mode="same")
    tone = 0.3 * np.sin(2 * np.pi * 330.0 * t) * (0.5 + 0.5 * np.sin(2 * np.pi * 1.5 * t))
    mix = colored / np.max(np.abs(colored)) * 0.4 + tone
    clips["speechlike"] = mix / np.max(np.abs(mix)) * 0.8

    return clips


def main():
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    for name, y in make_clips().items():
        wav_bytes, decoded = pcm16_round_trip(y)
        ref = reference_mfcc(decoded)
        assert ref.shape == (N_MFCC, 1 + CLIP // HOP), ref.shape
        (OUT_DIR / f"{name}.wav").write_bytes(wav_bytes)
        ref.astype("<f4").tofile(OUT_DIR / f"{name}.mfcc.f32")
        print(f"{name}: wav {len(wav_bytes)} bytes, mfcc {ref.shape}, "
              f"range [{ref.min():.2f}, {ref.max():.2f}]")

    # sanity: the two filterbank constructions should agree to float precision
    from rlser.dsp.mfcc import mel_filterbank

    ours = mel_filterbank()
    theirs = slaney_mel_ramps()
    print("filterbank max abs diff:", np.max(np.abs(ours - theirs)))


if __name__ == "__main__":
    main()
