"""Coarse 4-class motion classification for prompt construction.

A small temporal net (the shared IMU conv encoder plus a linear head)
trained on synthetic traces labels each window as walking, moving,
standing up, or sitting down. Inputs that resemble none of the four —
e.g. a sensor lying still at the noise floor — fall back to a configured
default class at low confidence, and the result is flagged so the caller
knows the label is a guess rather than a detection.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..checkpoint import load_checkpoint, save_checkpoint
from ..signals.motions import MOTION_CLASSES, ImuSequence, generate_motion
from ..temporal.encoders import ImuEncoder, imu_window_features
from .types import MotionClassification

MIN_MOTION_SECONDS = 2.0
FALLBACK_THRESHOLD = 0.5
FALLBACK_CLASS = "moving"
_TRAIN_WINDOW_SECONDS = 4.0
_IMU_RATE = 200.0


class MotionNet(nn.Module):
    """IMU conv encoder + linear head over the coarse motion classes."""

    KIND = "motion_net"

    def __init__(self, width: int = 64):
        super().__init__()
        self.width = int(width)
        self.class_names = MOTION_CLASSES
        self.encoder = ImuEncoder(self.width)
        self.head = nn.Linear(self.width, len(self.class_names))

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        return self.head(self.encoder(feats))

    def save(self, path) -> None:
        save_checkpoint(path, self.KIND, {"width": self.width},
                        self.state_dict(), vocab=self.class_names)

    @classmethod
    def load(cls, path) -> "MotionNet":
        payload = load_checkpoint(path, expected_kind=cls.KIND)
        model = cls(width=payload["config"]["width"])
        model.load_state_dict(payload["state"])
        model.eval()
        return model


def train_motion_classifier(seed: int = 0, n_per_class: int = 40,
                            epochs: int = 40, batch_size: int = 32,
                            lr: float = 1e-3, width: int = 64) -> MotionNet:
    """Train the coarse classifier on freshly generated synthetic traces."""
    rng = np.random.default_rng(seed)
    feats, labels = [], []
    for c, name in enumerate(MOTION_CLASSES):
        for _ in range(n_per_class):
            trace = generate_motion(name, _TRAIN_WINDOW_SECONDS,
                                    sample_rate=_IMU_RATE,
                                    seed=int(rng.integers(2 ** 31)))
            feats.append(imu_window_features(trace))
            labels.append(c)
    x = torch.as_tensor(np.stack(feats), dtype=torch.float32)
    y = torch.as_tensor(np.asarray(labels, dtype=np.int64))
    torch.manual_seed(seed)
    model = MotionNet(width=width)
    optimizer = torch.optim.Adam(model.parameters(), lr=lr)
    model.train()
    n = len(y)
    for _ in range(epochs):
        order = rng.permutation(n)
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            optimizer.zero_grad()
            loss = torch.nn.functional.cross_entropy(model(x[idx]), y[idx])
            loss.backward()
            optimizer.step()
    model.eval()
    return model


def classify_motion(model: MotionNet, imu: ImuSequence,
                    fallback_class: str = FALLBACK_CLASS,
                    fallback_threshold: float = FALLBACK_THRESHOLD
                    ) -> MotionClassification:
    """Label one IMU window with a coarse motion class.

    Requires at least 2 s of IMU. When the classifier's best class stays
    under `fallback_threshold`, the configured default class is reported
    instead, flagged as a fallback.
    """
    if imu.duration < MIN_MOTION_SECONDS - 1e-9:
        raise ValueError(
            f"need at least {MIN_MOTION_SECONDS} s of IMU, got "
            f"{imu.duration:.2f} s")
    if fallback_class not in model.class_names:
        raise ValueError(f"fallback class {fallback_class!r} is not one of "
                         f"{model.class_names}")
    feats = torch.as_tensor(imu_window_features(imu),
                            dtype=torch.float32).unsqueeze(0)
    was_training = model.training
    model.eval()
    try:
        with torch.no_grad():
            probs = torch.softmax(model(feats), dim=-1)[0].numpy()
    finally:
        model.train(was_training)
    top = int(np.argmax(probs))
    confidence = float(probs[top])
    if confidence < fallback_threshold:
        return MotionClassification(label=fallback_class,
                                    confidence=confidence,
                                    is_fallback=True)
    return MotionClassification(label=model.class_names[top],
                                confidence=confidence, is_fallback=False)
