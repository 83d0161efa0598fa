"""Domain types for token-fused human-activity recognition."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..temporal.types import Embedding

# Canonical token order inside the fusion encoder. Fusion treats tokens as a
# set; sorting by this order before encoding is what makes the fused output
# independent of the caller's argument order, bit for bit.
MODALITY_ORDER = ("audio", "imu", "text")

MODE_FULL_MULTIMODAL = "full_multimodal"
MODE_IMU_ONLY = "imu_only"

PROB_SUM_TOL = 1e-5


@dataclass(frozen=True)
class ModalityToken:
    """One fusion token: a feature embedding plus its modality embedding.

    The token value is the elementwise sum of the two vectors, so a zero
    feature leaves exactly the modality embedding, and the fusion encoder
    can tell modalities apart without any positional encoding.
    """

    feature: Embedding
    modality_embedding: np.ndarray

    def __post_init__(self):
        emb = np.asarray(self.modality_embedding, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "modality_embedding", emb)
        if not np.all(np.isfinite(emb)):
            raise ValueError("modality embedding contains non-finite values")
        if emb.shape[0] != self.feature.width:
            raise ValueError(
                f"modality embedding width {emb.shape[0]} does not match "
                f"feature width {self.feature.width}")

    @property
    def modality(self) -> str:
        return self.feature.modality

    @property
    def width(self) -> int:
        return self.feature.width

    @property
    def value(self) -> np.ndarray:
        return self.feature.values + self.modality_embedding


@dataclass(frozen=True)
class FusedFeature:
    """Mean-pooled output of the token fusion encoder."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", values)
        if values.shape[0] == 0:
            raise ValueError("fused feature is empty")
        if not np.all(np.isfinite(values)):
            raise ValueError("fused feature contains non-finite values")

    @property
    def width(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ActivityPrediction:
    """Softmax distribution over a fixed activity vocabulary."""

    probabilities: np.ndarray
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        if probs.shape[0] == 0:
            raise ValueError("prediction over an empty vocabulary")
        if self.class_names and len(self.class_names) != probs.shape[0]:
            raise ValueError("class name count does not match probabilities")
        if not np.all(np.isfinite(probs)):
            raise ValueError("probabilities contain non-finite values")
        if np.any(probs < -PROB_SUM_TOL) or np.any(probs > 1.0 + PROB_SUM_TOL):
            raise ValueError("probabilities outside [0, 1]")
        if abs(float(probs.sum()) - 1.0) > PROB_SUM_TOL:
            raise ValueError(
                f"probabilities sum to {float(probs.sum()):.8f}, not 1")

    @property
    def top1(self) -> int:
        return int(np.argmax(self.probabilities))

    @property
    def top1_name(self) -> str:
        if not self.class_names:
            raise ValueError("prediction carries no class names")
        return self.class_names[self.top1]

    @property
    def confidence(self) -> float:
        return float(self.probabilities[self.top1])
