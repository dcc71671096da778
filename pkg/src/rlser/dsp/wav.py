"""RIFF/PCM16 WAV decoding and encoding.

All audio enters the engine through `decode_wav`, which yields normalized
float samples in [-1, 1] (sample / 32768). Stereo is downmixed by averaging
the channels.
"""

from __future__ import annotations

import io
import wave
from dataclasses import dataclass

import numpy as np


class WavError(ValueError):
    """Raised for undecodable or unsupported WAV payloads."""


@dataclass(frozen=True)
class Waveform:
    """Mono audio samples in [-1, 1] plus their sample rate."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("waveform must be a non-empty 1-D sample array")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if self.sample_rate_hz <= 0:
            raise ValueError("sample rate must be positive")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration_seconds(self) -> float:
        return len(self.samples) / self.sample_rate_hz

    def rms(self) -> float:
        return float(np.sqrt(np.mean(np.square(self.samples))))


def decode_wav(data: bytes) -> Waveform:
    """Decode a RIFF/PCM16 payload into a normalized mono waveform.

    Stereo (or any multi-channel) input is downmixed by the per-frame channel
    mean. Raises WavError for non-PCM encodings, widths other than 16 bit,
    and truncated payloads.
    """
    try:
        with wave.open(io.BytesIO(data), "rb") as reader:
            if reader.getcomptype() != "NONE":
                raise WavError(f"unsupported WAV compression {reader.getcomptype()!r}, only PCM is accepted")
            if reader.getsampwidth() != 2:
                raise WavError(f"unsupported sample width {reader.getsampwidth() * 8} bit, only 16-bit PCM is accepted")
            n_channels = reader.getnchannels()
            n_frames = reader.getnframes()
            rate = reader.getframerate()
            raw = reader.readframes(n_frames)
    except wave.Error as exc:
        raise WavError(f"undecodable WAV payload: {exc}") from exc
    except EOFError as exc:
        raise WavError("truncated WAV payload") from exc

    if n_frames == 0:
        raise WavError("WAV payload contains no samples")
    if len(raw) < n_frames * n_channels * 2:
        raise WavError("truncated WAV payload: data chunk shorter than declared frame count")

    pcm = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    if n_channels > 1:
        pcm = pcm.reshape(-1, n_channels).mean(axis=1)
    return Waveform(pcm / 32768.0, rate)


def encode_wav(w: Waveform) -> bytes:
    """Encode a waveform as mono PCM16 RIFF bytes (deterministic).

    Scaling is the exact inverse of decode_wav: round(x * 32768), clipped to
    the int16 range.
    """
    pcm = np.clip(np.round(np.clip(w.samples, -1.0, 1.0) * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as writer:
        writer.setnchannels(1)
        writer.setsampwidth(2)
        writer.setframerate(w.sample_rate_hz)
        writer.writeframes(pcm.tobytes())
    return buf.getvalue()


def read_wav(path) -> Waveform:
    with open(path, "rb") as fh:
        return decode_wav(fh.read())


def write_wav(path, w: Waveform) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_wav(w))
