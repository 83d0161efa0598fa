"""Audio-IMU contrastive alignment and scenario sequence recognition."""

from .contrastive import (
    LOSS_MODES,
    POSITIVE_MODES,
    contrastive_logits,
    contrastive_loss,
    keyframe_similarity,
    positive_pair_labels,
)
from .encoders import (
    AudioEncoder,
    ContrastiveAligner,
    ImuEncoder,
    audio_window_features,
    encode_audio,
    encode_imu,
    imu_window_features,
)
from .sequence import (
    ARCHITECTURES,
    WINDOW_FEATURE_WIDTH,
    ScenarioAggregator,
    aggregate_sequence,
    window_feature,
)
from .training import train_aggregator, train_aligner
from .types import (
    ALIGNMENT_WINDOW_SECONDS,
    DEFAULT_HORIZON_SECONDS,
    EMBEDDING_WIDTH,
    Embedding,
    KeyFrameScore,
    ScenarioPrediction,
    TemperatureParam,
)

__all__ = [
    "ALIGNMENT_WINDOW_SECONDS",
    "ARCHITECTURES",
    "AudioEncoder",
    "ContrastiveAligner",
    "DEFAULT_HORIZON_SECONDS",
    "EMBEDDING_WIDTH",
    "Embedding",
    "ImuEncoder",
    "KeyFrameScore",
    "LOSS_MODES",
    "POSITIVE_MODES",
    "ScenarioAggregator",
    "ScenarioPrediction",
    "TemperatureParam",
    "WINDOW_FEATURE_WIDTH",
    "aggregate_sequence",
    "audio_window_features",
    "contrastive_logits",
    "contrastive_loss",
    "encode_audio",
    "encode_imu",
    "imu_window_features",
    "keyframe_similarity",
    "positive_pair_labels",
    "train_aggregator",
    "train_aligner",
    "window_feature",
]
