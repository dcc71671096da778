"""Audio augmentation: vocal-tract-length perturbation and SNR-controlled
noise mixing."""

from __future__ import annotations

import numpy as np

from rlser.dsp.wav import Waveform

VTLP_ALPHA_MIN = 0.8
VTLP_ALPHA_MAX = 1.2

# warp boundary as a fraction of Nyquist; content below it scales by alpha,
# content above is mapped linearly so Nyquist stays fixed
_VTLP_BOUNDARY_FRACTION = 0.85


def vtlp(w: Waveform, alpha: float) -> Waveform:
    """Warp the frequency axis of the clip by factor alpha (speaker
    vocal-tract variation).

    The warp runs on the clip's full spectrum (a single-frame transform, so
    synthesis is exactly invertible and Parseval keeps broadband energy):
    content below the boundary scales by alpha, the band above maps linearly
    so Nyquist stays fixed. Complex bins are interpolated at the inverse-map
    positions and rescaled to the interpolated magnitude. Length is preserved
    exactly; alpha = 1 is the identity.
    """
    if not (VTLP_ALPHA_MIN <= alpha <= VTLP_ALPHA_MAX):
        raise ValueError(f"warp factor {alpha} outside [{VTLP_ALPHA_MIN}, {VTLP_ALPHA_MAX}]")

    n = len(w.samples)
    spec = np.fft.rfft(w.samples)
    n_bins = len(spec)
    nyq = float(n_bins - 1)
    boundary = _VTLP_BOUNDARY_FRACTION * nyq * min(1.0, 1.0 / alpha)

    # invert the piecewise-linear map m(f) = alpha*f below the boundary,
    # (boundary, alpha*boundary) -> (nyq, nyq) above it
    u = np.arange(n_bins, dtype=np.float64)
    knee = alpha * boundary
    src = np.where(
        u <= knee,
        u / alpha,
        boundary + (u - knee) * (nyq - boundary) / max(nyq - knee, 1e-9),
    )
    src = np.clip(src, 0.0, nyq)

    i0 = np.minimum(src.astype(np.int64), n_bins - 2)
    frac = src - i0
    zi = spec[i0] * (1.0 - frac) + spec[i0 + 1] * frac
    mag = np.abs(spec)
    mi = mag[i0] * (1.0 - frac) + mag[i0 + 1] * frac
    # the complex interpolation carries phase; restore the interpolated
    # magnitude so phase disagreement between neighbors cannot eat energy
    zi_mag = np.abs(zi)
    warped = zi * np.divide(mi, zi_mag, out=np.ones_like(mi), where=zi_mag > 1e-12)

    return Waveform(np.fft.irfft(warped, n=n), w.sample_rate_hz)


def mix_noise(
    speech: Waveform,
    noise: Waveform,
    snr_db: float,
    rng: np.random.Generator | None = None,
) -> Waveform:
    """Add noise to speech at the requested SNR.

    The noise gain is g = (rms(speech) / rms(noise_segment)) * 10^(-snr_db/20),
    computed on the exact segment mixed in, so the achieved SNR is exact. A
    noise recording shorter than the speech is tiled; when an rng is supplied
    the segment starts at a random circular offset. If the mix would exceed
    full scale it is peak-normalized (which preserves the SNR) before the
    final clip to [-1, 1].
    """
    if speech.sample_rate_hz != noise.sample_rate_hz:
        raise ValueError(
            f"sample rate mismatch: speech {speech.sample_rate_hz} Hz vs noise {noise.sample_rate_hz} Hz"
        )
    n = len(speech.samples)
    offset = int(rng.integers(0, len(noise.samples))) if rng is not None else 0
    rolled = np.roll(noise.samples, -offset)
    reps = -(-n // len(rolled))  # ceil
    segment = np.tile(rolled, reps)[:n] if reps > 1 else rolled[:n]

    rms_s = speech.rms()
    rms_n = float(np.sqrt(np.mean(segment * segment)))
    if rms_s <= 0.0:
        raise ValueError("zero-energy speech")
    if rms_n <= 0.0:
        raise ValueError("zero-energy noise segment")

    gain = (rms_s / rms_n) * 10.0 ** (-snr_db / 20.0)
    out = speech.samples + gain * segment
    peak = np.max(np.abs(out))
    if peak > 1.0:
        out = out / peak
    return Waveform(np.clip(out, -1.0, 1.0), speech.sample_rate_hz)
