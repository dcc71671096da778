"""Reward-driven domain adaptation for speech emotion recognition.

Subpackages:
  corpus      -- manifest ingestion, splits, class balancing, domain composition,
                 synthetic corpus generation
  dsp         -- WAV decoding, resampling, MFCC features, VTLP, SNR noise mixing
  nn          -- the CNN-LSTM network with hand-written backprop, Adam, checkpoints
  agent       -- replay buffer, Bellman targets, DQN loss, action policies
  env         -- emotion-recognition environments and feedback channels
  experiments -- scenario runner, UAR evaluation, report generation
  service     -- HTTP inference service with an online feedback trainer
"""

from rlser.labels import EmotionLabel

__version__ = "0.1.0"

__all__ = ["EmotionLabel", "__version__"]
