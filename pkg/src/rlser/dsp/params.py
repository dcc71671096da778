"""Pinned analysis parameters for the feature pipeline.

Every utterance is brought to 22050 Hz / 2.0 s before feature extraction, so
the MFCC matrix is always 40 coefficients x 87 frames (1 + 44100 // 512).
"""

SAMPLE_RATE = 22050
CLIP_SECONDS = 2.0
CLIP_SAMPLES = int(round(CLIP_SECONDS * SAMPLE_RATE))  # 44100

N_FFT = 2048  # analysis frame length
HOP_LENGTH = 512
N_MELS = 128
N_MFCC = 40
LOG_FLOOR = 1e-10  # floor applied to mel powers before the log

EXPECTED_FRAMES = 1 + CLIP_SAMPLES // HOP_LENGTH  # 87, with centered framing

# RMS fraction of the peak amplitude above which a frame counts as speech onset
ONSET_RMS_FRACTION = 0.02
ONSET_FRAME = 512
