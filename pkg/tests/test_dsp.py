import io
import wave as wave_mod
from pathlib import Path

import numpy as np
import pytest

from rlser.dsp import (
    CLIP_SAMPLES,
    EXPECTED_FRAMES,
    N_MFCC,
    SAMPLE_RATE,
    WavError,
    Waveform,
    decode_wav,
    encode_wav,
    extract_features,
    fix_duration,
    istft,
    mfcc,
    mix_noise,
    read_wav,
    resample,
    stft,
    vtlp,
)
from tests.conftest import GOLDEN_DIR, speechlike_noise


def pcm16_bytes(samples, rate=22050, channels=1):
    pcm = np.round(np.clip(samples, -1, 1) * 32767.0).astype("<i2")
    buf = io.BytesIO()
    with wave_mod.open(buf, "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(pcm.tobytes())
    return buf.getvalue()


class TestWav:
    def test_silence_decodes_to_zeros(self):
        w = decode_wav(pcm16_bytes(np.zeros(22050)))
        assert len(w) == 22050
        assert np.all(w.samples == 0.0)

    def test_int16_scaling_is_exact(self):
        raw = np.array([16384], dtype="<i2")
        buf = io.BytesIO()
        with wave_mod.open(buf, "wb") as writer:
            writer.setnchannels(1)
            writer.setsampwidth(2)
            writer.setframerate(22050)
            writer.writeframes(raw.tobytes())
        w = decode_wav(buf.getvalue())
        assert w.samples[0] == 0.5

    def test_stereo_downmix_is_channel_mean(self):
        # interleaved L/R with known values: mean computed by hand
        left = np.array([0.5, -0.25, 0.0])
        right = np.array([0.25, 0.25, 1.0])
        inter = np.empty(6)
        inter[0::2] = left
        inter[1::2] = right
        w = decode_wav(pcm16_bytes(inter, channels=2))
        li = np.round(left * 32767)
        ri = np.round(right * 32767)
        expected = (li + ri) / 2.0 / 32768.0
        assert w.samples == pytest.approx(expected, abs=1e-12)
        assert len(w) == 3

    def test_rejects_non_pcm(self):
        data = bytearray(pcm16_bytes(np.zeros(100)))
        # flip the audio-format tag in the fmt chunk to IEEE float (3)
        fmt_at = data.find(b"fmt ")
        data[fmt_at + 8] = 3
        with pytest.raises(WavError):
            decode_wav(bytes(data))

    def test_rejects_truncated_payload(self):
        data = pcm16_bytes(np.zeros(1000))
        with pytest.raises(WavError):
            decode_wav(data[:-100])

    def test_rejects_wrong_width(self):
        buf = io.BytesIO()
        with wave_mod.open(buf, "wb") as writer:
            writer.setnchannels(1)
            writer.setsampwidth(1)
            writer.setframerate(22050)
            writer.writeframes(bytes(100))
        with pytest.raises(WavError):
            decode_wav(buf.getvalue())

    def test_encode_decode_round_trip(self):
        rng = np.random.default_rng(5)
        w = Waveform(rng.uniform(-0.9, 0.9, 4096), 22050)
        back = decode_wav(encode_wav(w))
        assert back.sample_rate_hz == 22050
        assert np.max(np.abs(back.samples - w.samples)) < 1.0 / 32768.0


class TestResample:
    def test_48k_to_22050_length(self):
        w = Waveform(np.sin(2 * np.pi * 1000 * np.arange(48000) / 48000), 48000)
        r = resample(w, 22050)
        assert r.sample_rate_hz == 22050
        assert len(r) == 22050

    def test_identity_when_rate_matches(self, sine_wave):
        assert resample(sine_wave, 22050) is sine_wave

    def test_sine_frequency_preserved(self):
        # FFT oracle: dominant bin stays at 1 kHz within one bin
        w = Waveform(np.sin(2 * np.pi * 1000 * np.arange(48000) / 48000), 48000)
        r = resample(w, 22050)
        spec = np.abs(np.fft.rfft(r.samples))
        freqs = np.fft.rfftfreq(len(r), 1 / 22050)
        bin_width = 22050 / len(r)
        assert abs(freqs[np.argmax(spec)] - 1000.0) <= bin_width


class TestFixDuration:
    def test_truncates_to_two_seconds(self):
        w = Waveform(np.random.default_rng(0).normal(0, 0.3, 3 * 22050), 22050)
        out = fix_duration(w)
        assert len(out) == 44100

    def test_pads_short_input_with_trailing_zeros(self):
        w = Waveform(np.ones(22050) * 0.4, 22050)
        out = fix_duration(w)
        assert len(out) == 44100
        assert np.all(out.samples[22050:] == 0.0)
        assert np.all(out.samples[:22050] == 0.4)

    def test_truncation_starts_at_energy_onset(self):
        # 1.5 s of silence then a tone: the window must skip the silence
        sr = 22050
        sig = np.zeros(4 * sr)
        t = np.arange(2 * sr) / sr
        start = int(1.5 * sr)
        sig[start : start + 2 * sr] = 0.5 * np.sin(2 * np.pi * 330 * t)
        out = fix_duration(Waveform(sig, sr))
        assert len(out) == 44100
        assert out.rms() > 0.2  # mostly tone, not leading silence

    def test_mfcc_after_fix_duration_always_87_frames(self):
        rng = np.random.default_rng(3)
        for n in [1000, 22050, 44100, 44101, 99999]:
            w = Waveform(rng.normal(0, 0.2, n), 22050)
            feats = mfcc(fix_duration(w))
            assert feats.shape == (N_MFCC, EXPECTED_FRAMES)


class TestMfcc:
    def test_shape_for_two_second_clip(self, sine_wave):
        assert mfcc(sine_wave).shape == (40, 87)

    def test_silence_gives_constant_columns(self):
        feats = mfcc(Waveform(np.full(CLIP_SAMPLES, 1e-12), 22050))
        # log floor makes every frame identical: first coefficient carries the
        # floor, the rest are zero
        assert np.allclose(feats, feats[:, :1], atol=1e-4)
        assert np.allclose(feats[1:], 0.0, atol=1e-4)

    def test_deterministic(self, sine_wave):
        a = mfcc(sine_wave)
        b = mfcc(sine_wave)
        assert np.array_equal(a, b)

    def test_wrong_rate_rejected(self):
        with pytest.raises(ValueError, match="22050"):
            mfcc(Waveform(np.zeros(16000) + 0.1, 16000))

    def test_wrong_duration_rejected(self, sine_wave):
        short = Waveform(sine_wave.samples[:22050], 22050)
        with pytest.raises(ValueError, match="duration"):
            mfcc(short)

    @pytest.mark.parametrize("name", ["sine440", "harmonic_stack", "speechlike"])
    def test_golden_vectors(self, name):
        w = read_wav(Path(GOLDEN_DIR) / f"{name}.wav")
        got = mfcc(w)
        ref = np.fromfile(Path(GOLDEN_DIR) / f"{name}.mfcc.f32", dtype="<f4").reshape(40, 87)
        assert np.max(np.abs(got - ref)) < 1e-3


class TestStft:
    def test_round_trip_rms_below_1e6(self):
        rng = np.random.default_rng(11)
        for n in (44100, 30000):
            x = rng.normal(0, 0.2, n)
            back = istft(stft(x), n)
            assert np.sqrt(np.mean((back - x) ** 2)) < 1e-6


class TestVtlp:
    def test_identity_warp(self, sine_wave):
        out = vtlp(sine_wave, 1.0)
        err = np.sqrt(np.mean((out.samples - sine_wave.samples) ** 2))
        assert err < 1e-6
        assert len(out) == len(sine_wave)

    def test_440_warped_by_1_1_lands_near_484(self, sine_wave):
        out = vtlp(sine_wave, 1.1)
        spec = np.abs(np.fft.rfft(out.samples))
        freqs = np.fft.rfftfreq(len(out), 1 / 22050)
        # one analysis bin of the 2048-point STFT the warp operates on
        analysis_bin = 22050 / 2048
        assert abs(freqs[np.argmax(spec)] - 484.0) <= analysis_bin

    def test_alpha_out_of_range(self, sine_wave):
        with pytest.raises(ValueError):
            vtlp(sine_wave, 1.3)

    def test_energy_ratio_bounded_on_speechlike_noise(self):
        for seed in range(8):
            w = speechlike_noise(seed)
            alpha = float(np.random.default_rng(seed + 100).uniform(0.9, 1.1))
            out = vtlp(w, alpha)
            ratio = np.sum(out.samples**2) / np.sum(w.samples**2)
            assert 0.8 <= ratio <= 1.25, (seed, alpha, ratio)

    def test_length_preserved_exactly(self):
        w = speechlike_noise(3, n=33333)
        assert len(vtlp(w, 1.08)) == 33333


class TestMixNoise:
    def test_gain_formula_hand_value(self):
        # rms(speech) = rms(noise) = 0.1, snr -5 dB -> g = 10^0.25
        sr = 22050
        t = np.arange(sr) / sr
        speech = Waveform(0.1 * np.sqrt(2) * np.sin(2 * np.pi * 440 * t), sr)
        noise = Waveform(0.1 * np.sqrt(2) * np.sin(2 * np.pi * 1234 * t), sr)
        assert speech.rms() == pytest.approx(0.1, rel=1e-6)
        out = mix_noise(speech, noise, -5.0)
        resid = out.samples - speech.samples
        g = np.sqrt(np.mean(resid**2)) / noise.rms()
        assert g == pytest.approx(10**0.25, rel=1e-3)

    def test_large_snr_returns_speech(self, sine_wave):
        noise = speechlike_noise(1)
        out = mix_noise(sine_wave, noise, 120.0)
        assert np.max(np.abs(out.samples - sine_wave.samples)) < 1e-5

    def test_achieved_snr_within_tenth_db(self):
        # inputs scaled low enough that peak normalization never kicks in, so
        # the noise component is recoverable as out - speech
        rng = np.random.default_rng(0)
        for trial in range(100):
            s = speechlike_noise(trial, n=int(rng.integers(20000, 50000)))
            n = speechlike_noise(1000 + trial, n=int(rng.integers(10000, 60000)))
            s = Waveform(s.samples * 0.05, s.sample_rate_hz)
            n = Waveform(n.samples * 0.05, n.sample_rate_hz)
            snr = float(rng.uniform(-10, 20))
            out = mix_noise(s, n, snr, rng=np.random.default_rng(trial))
            resid = out.samples - s.samples
            achieved = 20 * np.log10(s.rms() / np.sqrt(np.mean(resid**2)))
            assert abs(achieved - snr) < 0.1, (trial, snr, achieved)

    def test_peak_normalization_preserves_component_ratio(self):
        sr = 22050
        t = np.arange(sr) / sr
        speech = Waveform(0.9 * np.sin(2 * np.pi * 300 * t), sr)
        noise = Waveform(0.9 * np.sin(2 * np.pi * 777 * t), sr)
        out = mix_noise(speech, noise, -5.0)
        assert np.max(np.abs(out.samples)) <= 1.0

    def test_zero_energy_inputs_rejected(self, sine_wave):
        silent = Waveform(np.zeros(44100), 22050)
        with pytest.raises(ValueError):
            mix_noise(silent, sine_wave, 0.0)
        with pytest.raises(ValueError):
            mix_noise(sine_wave, silent, 0.0)

    def test_rate_mismatch_rejected(self, sine_wave):
        other = Waveform(np.ones(1000) * 0.1, 16000)
        with pytest.raises(ValueError, match="mismatch"):
            mix_noise(sine_wave, other, 0.0)

    def test_short_noise_is_tiled(self, sine_wave):
        short = speechlike_noise(9, n=5000)
        out = mix_noise(sine_wave, short, 10.0, rng=np.random.default_rng(1))
        assert len(out) == len(sine_wave)


class TestFullPipeline:
    def test_extract_features_from_48k(self):
        w = Waveform(np.sin(2 * np.pi * 500 * np.arange(96000) / 48000) * 0.3, 48000)
        feats = extract_features(w)
        assert feats.shape == (40, 87)
        assert feats.dtype == np.float32
        assert np.all(np.isfinite(feats))
