"""Domain types for cross-modal alignment and scenario sequence prediction."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

EMBEDDING_WIDTH = 128
MODALITIES = ("audio", "imu", "text")
ALIGNMENT_WINDOW_SECONDS = 2.0
DEFAULT_HORIZON_SECONDS = 30.0
TAU_MIN, TAU_MAX = -5.0, 5.0


@dataclass(frozen=True)
class Embedding:
    """A width-D vector tagged with the modality that produced it."""

    values: np.ndarray
    modality: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "values", values)
        if not np.all(np.isfinite(values)):
            raise ValueError("embedding contains non-finite values")
        if self.modality not in MODALITIES:
            raise ValueError(f"unknown modality {self.modality!r}")

    @property
    def width(self) -> int:
        return self.values.shape[0]

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.values))

    def is_unit(self, tol: float = 1e-5) -> bool:
        return abs(self.norm - 1.0) <= tol


@dataclass
class TemperatureParam:
    """Learnable contrastive temperature; exp(tau) scales the logits."""

    tau: float = 0.0

    def __post_init__(self):
        self.tau = float(np.clip(self.tau, TAU_MIN, TAU_MAX))
        if not np.isfinite(np.exp(self.tau)):
            raise ValueError("exp(tau) overflows")

    @property
    def scale(self) -> float:
        return float(np.exp(self.tau))


@dataclass(frozen=True)
class KeyFrameScore:
    """Cosine similarity of a paired audio/IMU window, in [-1, 1]."""

    similarity: float

    def __post_init__(self):
        if not np.isfinite(self.similarity):
            raise ValueError("similarity must be finite")
        if not -1.0 - 1e-9 <= self.similarity <= 1.0 + 1e-9:
            raise ValueError("similarity outside [-1, 1]")
        object.__setattr__(self, "similarity",
                           float(np.clip(self.similarity, -1.0, 1.0)))


@dataclass(frozen=True)
class ScenarioPrediction:
    """Independent per-class sigmoid probabilities (multi-label scenario)."""

    probabilities: np.ndarray
    class_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        probs = np.asarray(self.probabilities, dtype=np.float64).reshape(-1)
        object.__setattr__(self, "probabilities", probs)
        if probs.size == 0:
            raise ValueError("empty prediction")
        if not np.all(np.isfinite(probs)):
            raise ValueError("non-finite probabilities")
        if np.any(probs < -1e-9) or np.any(probs > 1.0 + 1e-9):
            raise ValueError("probabilities outside [0, 1]")
        if self.class_names and len(self.class_names) != probs.size:
            raise ValueError("class name count mismatch")

    @property
    def confidence(self) -> float:
        return float(np.max(self.probabilities))

    @property
    def top1(self) -> int:
        return int(np.argmax(self.probabilities))

    def top1_name(self) -> str:
        if not self.class_names:
            raise ValueError("prediction carries no class names")
        return self.class_names[self.top1]
