from rlser.env.emotion_env import EmotionEnv, EnvState, StreamConfig, StreamOrdering, make_live_feed
from rlser.env.features import FeatureCache, NoiseConfig
from rlser.env.feedback import (
    DEFAULT_FEEDBACK_TIMEOUT_S,
    DuplicateJudgmentError,
    ExpiredInferenceError,
    FeedbackError,
    FeedbackQueueFullError,
    FeedbackStats,
    HumanFeedbackChannel,
    UnknownInferenceError,
    resolve_human_feedback,
    scripted_reward,
)

__all__ = [
    "DEFAULT_FEEDBACK_TIMEOUT_S",
    "DuplicateJudgmentError",
    "EmotionEnv",
    "EnvState",
    "ExpiredInferenceError",
    "FeatureCache",
    "FeedbackError",
    "FeedbackQueueFullError",
    "FeedbackStats",
    "HumanFeedbackChannel",
    "NoiseConfig",
    "StreamConfig",
    "StreamOrdering",
    "UnknownInferenceError",
    "make_live_feed",
    "resolve_human_feedback",
    "scripted_reward",
]
