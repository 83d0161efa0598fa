"""Small CPU-scale audio and IMU encoders plus the contrastive aligner.

Both encoders emit width-D unit-norm embeddings from a 2-second window:
log-Mel frames for audio, the raw 6-axis sequence for inertial data. The
aligner owns both encoders and the learnable temperature.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..checkpoint import load_checkpoint, save_checkpoint
from ..signals import SensorWindow, log_mel
from ..signals.types import AudioClip, ImuSequence
from .contrastive import contrastive_logits
from .types import (
    ALIGNMENT_WINDOW_SECONDS,
    EMBEDDING_WIDTH,
    TAU_MAX,
    TAU_MIN,
    Embedding,
)


def audio_window_features(clip: AudioClip) -> np.ndarray:
    """Channel-averaged log-Mel map [n_mels, T] for one alignment window."""
    mel = log_mel(clip)                      # [C, T, n_mels]
    return mel.mean(axis=0).T.astype(np.float32)


def imu_window_features(seq: ImuSequence) -> np.ndarray:
    """Scaled 6-axis sequence [6, T]; gravity removed from the vertical axis."""
    x = np.array(seq.samples, dtype=np.float32)
    x[2] = x[2] - 9.81
    return x * 0.25


class _ConvStack(nn.Module):
    def __init__(self, in_channels: int, width: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Conv1d(in_channels, 64, kernel_size=5, stride=2, padding=2),
            nn.GELU(),
            nn.Conv1d(64, 96, kernel_size=5, stride=2, padding=2),
            nn.GELU(),
            nn.Conv1d(96, width, kernel_size=3, stride=2, padding=1),
            nn.GELU(),
        )
        self.proj = nn.Linear(width, width)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        h = self.net(x).mean(dim=2)
        h = self.proj(h)
        return h / h.norm(dim=1, keepdim=True).clamp_min(1e-12)


class AudioEncoder(_ConvStack):
    """Log-Mel [B, 64, T] -> unit-norm [B, D]."""

    def __init__(self, width: int = EMBEDDING_WIDTH):
        super().__init__(64, width)


class ImuEncoder(_ConvStack):
    """6-axis [B, 6, T] -> unit-norm [B, D]."""

    def __init__(self, width: int = EMBEDDING_WIDTH):
        super().__init__(6, width)


class ContrastiveAligner(nn.Module):
    """Paired encoders with a learnable temperature, clamped to [-5, 5]."""

    KIND = "contrastive_aligner"

    def __init__(self, width: int = EMBEDDING_WIDTH):
        super().__init__()
        self.width = width
        self.audio_encoder = AudioEncoder(width)
        self.imu_encoder = ImuEncoder(width)
        self.tau = nn.Parameter(torch.zeros(()))

    def clamp_tau(self) -> None:
        with torch.no_grad():
            self.tau.clamp_(TAU_MIN, TAU_MAX)

    def forward(self, audio_feats: torch.Tensor, imu_feats: torch.Tensor):
        a = self.audio_encoder(audio_feats)
        i = self.imu_encoder(imu_feats)
        return a, i, contrastive_logits(a, i, self.tau)

    # -- single-window inference -------------------------------------------
    def _check_window(self, window: SensorWindow) -> None:
        if abs(window.duration - ALIGNMENT_WINDOW_SECONDS) > 1e-6:
            raise ValueError(
                f"alignment windows span {ALIGNMENT_WINDOW_SECONDS} s, "
                f"got {window.duration} s")

    @torch.no_grad()
    def encode_audio(self, window: SensorWindow) -> Embedding:
        self._check_window(window)
        feats = audio_window_features(window.audio)
        if not np.all(np.isfinite(feats)):
            raise ValueError("non-finite audio features")
        self.eval()
        vec = self.audio_encoder(torch.from_numpy(feats)[None])[0].numpy()
        return Embedding(values=vec, modality="audio")

    @torch.no_grad()
    def encode_imu(self, window: SensorWindow) -> Embedding:
        self._check_window(window)
        feats = imu_window_features(window.imu)
        if not np.all(np.isfinite(feats)):
            raise ValueError("non-finite IMU features")
        self.eval()
        vec = self.imu_encoder(torch.from_numpy(feats)[None])[0].numpy()
        return Embedding(values=vec, modality="imu")

    # -- persistence ---------------------------------------------------------
    def save(self, path) -> None:
        save_checkpoint(path, self.KIND, {"width": self.width}, self.state_dict())

    @classmethod
    def load(cls, path) -> "ContrastiveAligner":
        payload = load_checkpoint(path, expected_kind=cls.KIND)
        model = cls(width=payload["config"]["width"])
        model.load_state_dict(payload["state"])
        model.eval()
        return model


def encode_audio(model: ContrastiveAligner, window: SensorWindow) -> Embedding:
    """Functional form of ContrastiveAligner.encode_audio."""
    return model.encode_audio(window)


def encode_imu(model: ContrastiveAligner, window: SensorWindow) -> Embedding:
    """Functional form of ContrastiveAligner.encode_imu."""
    return model.encode_imu(window)
