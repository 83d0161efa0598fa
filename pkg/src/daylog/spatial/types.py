"""Output containers for the binaural localization stage."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..signals.labels import (FAR_CLASS_INDICES, N_SPATIAL_CLASSES,
                              NEAR_CLASS_INDICES)

GATE_AUDIO_OK = "audio_ok"
GATE_FAR_FIELD = "far_field_dominant"
ROW_SUM_TOL = 1e-5
MOTION_HIDDEN_WIDTH = 384


@dataclass
class SpatialPrediction:
    """Per-frame probabilities over the 8 (direction, distance) classes.

    In single-source mode each frame row is a softmax distribution summing to
    1 within 1e-5; in multi-source mode rows hold independent per-class
    sigmoid probabilities bounded in [0, 1].
    """

    frame_probs: np.ndarray
    multi_source: bool = False

    def __post_init__(self):
        self.frame_probs = np.asarray(self.frame_probs, dtype=np.float64)
        if self.frame_probs.ndim != 2 or self.frame_probs.shape[1] != N_SPATIAL_CLASSES:
            raise ValueError(
                f"frame_probs must be [frames, {N_SPATIAL_CLASSES}], "
                f"got {self.frame_probs.shape}"
            )
        if self.frame_probs.shape[0] < 1:
            raise ValueError("prediction needs at least one frame")
        if not np.all(np.isfinite(self.frame_probs)):
            raise ValueError("frame probabilities must be finite")
        if np.any(self.frame_probs < -ROW_SUM_TOL) or np.any(self.frame_probs > 1 + ROW_SUM_TOL):
            raise ValueError("frame probabilities must lie in [0, 1]")
        if not self.multi_source:
            sums = self.frame_probs.sum(axis=1)
            if np.any(np.abs(sums - 1.0) > ROW_SUM_TOL):
                raise ValueError(
                    "single-source frame rows must each sum to 1 within "
                    f"{ROW_SUM_TOL}; worst deviation {np.max(np.abs(sums - 1.0)):.2e}"
                )

    @property
    def n_frames(self) -> int:
        return self.frame_probs.shape[0]

    @property
    def near_confidence(self) -> float:
        """Max over frames of the total probability mass on the near classes."""
        return float(self.frame_probs[:, list(NEAR_CLASS_INDICES)].sum(axis=1).max())

    @property
    def far_confidence(self) -> float:
        """Max over frames of the total probability mass on the far classes."""
        return float(self.frame_probs[:, list(FAR_CLASS_INDICES)].sum(axis=1).max())

    @property
    def frame_argmax(self) -> np.ndarray:
        """Most likely class index per frame, [frames] ints."""
        return np.argmax(self.frame_probs, axis=1)


@dataclass
class MotionFeatures:
    """Hidden representation from the inertial branch: [384, T]."""

    hidden: np.ndarray

    def __post_init__(self):
        self.hidden = np.asarray(self.hidden, dtype=np.float64)
        if self.hidden.ndim != 2 or self.hidden.shape[0] != MOTION_HIDDEN_WIDTH:
            raise ValueError(
                f"hidden must be [{MOTION_HIDDEN_WIDTH}, T], got {self.hidden.shape}"
            )
        if not np.all(np.isfinite(self.hidden)):
            raise ValueError("motion features must be finite")

    @property
    def n_steps(self) -> int:
        return self.hidden.shape[1]
