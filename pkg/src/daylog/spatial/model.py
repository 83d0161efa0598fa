"""Neural binaural localizer with an inertial compensation branch.

The audio path runs three convolutional layers (the last downsamples time by
5), a GRU, multi-head self-attention, and a linear head emitting per-frame
scores over the 8 spatial classes. The motion path runs two transformer
layers over the 6-axis inertial sequence, keeping a 384-wide hidden state per
step; the compensated variant concatenates pooled motion features with the
GRU output before the attention block.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from ..checkpoint import load_checkpoint, save_checkpoint
from ..signals.labels import N_SPATIAL_CLASSES, class_names
from ..signals.types import ImuSequence, SpatialFeatures
from ..temporal.encoders import imu_window_features
from .types import MOTION_HIDDEN_WIDTH, MotionFeatures, SpatialPrediction

TIME_DOWNSAMPLE = 5
MEL_SHIFT = 6.0
MEL_SCALE = 4.0
POSITION_SCALE = 0.2


def prep_features(features) -> torch.Tensor:
    """Normalize a [3, T, 64] feature stack for the network, padding T to a
    multiple of 5 by edge replication. Returns a float32 tensor."""
    tensor = features.tensor if isinstance(features, SpatialFeatures) else features
    tensor = np.asarray(tensor, dtype=np.float64)
    if tensor.ndim != 3 or tensor.shape[0] != 3 or tensor.shape[2] != 64:
        raise ValueError(f"expected features of shape [3, T, 64], got {tensor.shape}")
    if not np.all(np.isfinite(tensor)):
        raise ValueError("features must be finite")
    pad = (-tensor.shape[1]) % TIME_DOWNSAMPLE
    if pad:
        tensor = np.pad(tensor, ((0, 0), (0, pad), (0, 0)), mode="edge")
    x = tensor.copy()
    x[:2] = (x[:2] + MEL_SHIFT) / MEL_SCALE
    return torch.from_numpy(x).float()


def prep_imu(imu) -> torch.Tensor:
    """Normalize a 6-axis inertial window for the network: float32 [6, T]."""
    if isinstance(imu, ImuSequence):
        return torch.from_numpy(imu_window_features(imu))
    x = np.asarray(imu, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != 6:
        raise ValueError(f"expected an inertial window of shape [6, T], got {x.shape}")
    return torch.from_numpy(imu_window_features(ImuSequence(samples=x)))


def _sinusoidal_positions(n_steps: int, width: int) -> torch.Tensor:
    """Fixed sinusoidal position codes [n_steps, width]."""
    pos = torch.arange(n_steps, dtype=torch.float32)[:, None]
    idx = torch.arange(width // 2, dtype=torch.float32)[None, :]
    angle = pos / torch.pow(10000.0, 2.0 * idx / width)
    out = torch.zeros(n_steps, width)
    out[:, 0::2] = torch.sin(angle)
    out[:, 1::2] = torch.cos(angle)
    return out


class _AudioTrunk(nn.Module):
    """Conv stack (time stride 5 in the final layer) followed by a GRU."""

    def __init__(self, width: int):
        super().__init__()
        self.conv = nn.Sequential(
            nn.Conv2d(3, 16, kernel_size=(5, 5), stride=(1, 4), padding=(2, 2)),
            nn.GELU(),
            nn.Conv2d(16, 32, kernel_size=(5, 3), stride=(1, 2), padding=(2, 1)),
            nn.GELU(),
            nn.Conv2d(32, 64, kernel_size=(5, 3), stride=(TIME_DOWNSAMPLE, 2),
                      padding=(0, 1)),
            nn.GELU(),
        )
        self.gru = nn.GRU(64 * 4, width, batch_first=True)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        if feats.shape[2] % TIME_DOWNSAMPLE:
            raise ValueError("time axis must be divisible by 5 (pad first)")
        z = self.conv(feats)                      # [B, 64, T/5, 4]
        b, c, t5, f = z.shape
        z = z.permute(0, 2, 1, 3).reshape(b, t5, c * f)
        out, _ = self.gru(z)                       # [B, T/5, width]
        return out


class _AttentiveHead(nn.Module):
    """Multi-head self-attention with a residual, then the linear class head."""

    def __init__(self, width: int, n_heads: int = 4):
        super().__init__()
        self.attn = nn.MultiheadAttention(width, n_heads, batch_first=True)
        self.norm = nn.LayerNorm(width)
        self.head = nn.Linear(width, N_SPATIAL_CLASSES)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        attended, _ = self.attn(x, x, x, need_weights=False)
        return self.head(self.norm(x + attended))


class AudioLocalizer(nn.Module):
    """Audio-only localizer: conv stack -> GRU -> attention -> linear."""

    KIND = "audio_localizer"

    def __init__(self, width: int = 128, multi_source: bool = False):
        super().__init__()
        self.width = width
        self.multi_source = multi_source
        self.trunk = _AudioTrunk(width)
        self.attn_head = _AttentiveHead(width)

    def forward(self, feats: torch.Tensor) -> torch.Tensor:
        """Logits [B, T/5, 8] from normalized features [B, 3, T, 64]."""
        return self.attn_head(self.trunk(feats))

    def save(self, path) -> None:
        save_checkpoint(path, kind=self.KIND,
                        config={"width": self.width,
                                "multi_source": self.multi_source,
                                "classes": list(class_names())},
                        state_dict=self.state_dict())

    @classmethod
    def load(cls, path) -> "AudioLocalizer":
        payload = load_checkpoint(path, expected_kind=cls.KIND)
        _check_class_order(payload["config"])
        model = cls(width=payload["config"]["width"],
                    multi_source=payload["config"]["multi_source"])
        model.load_state_dict(payload["state"])
        model.eval()
        return model


class MotionBranch(nn.Module):
    """Two transformer layers over the inertial sequence, 384 wide per step."""

    KIND = "motion_branch"

    def __init__(self, n_heads: int = 6, feedforward: int = 256):
        super().__init__()
        self.n_heads = n_heads
        self.feedforward = feedforward
        # Raw 6-axis input plus its running mean (strapdown-style integration:
        # the summed gyro rate is the heading change since window start, the
        # quantity that actually disambiguates mirrored directions).
        self.proj = nn.Linear(12, MOTION_HIDDEN_WIDTH)
        layer = nn.TransformerEncoderLayer(
            MOTION_HIDDEN_WIDTH, n_heads, dim_feedforward=feedforward,
            dropout=0.0, batch_first=True, activation="gelu")
        self.encoder = nn.TransformerEncoder(layer, num_layers=2,
                                             enable_nested_tensor=False)
        self.score = nn.Linear(MOTION_HIDDEN_WIDTH, N_SPATIAL_CLASSES)

    def forward(self, imu: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """(hidden [B, 384, T], scores [B, T/5, 8]) from normalized [B, 6, T]."""
        if imu.ndim != 3 or imu.shape[1] != 6:
            raise ValueError(f"expected [B, 6, T] inertial input, got {tuple(imu.shape)}")
        steps = imu.shape[2]
        integrated = imu.cumsum(dim=2) / steps
        x = self.proj(torch.cat([imu, integrated], dim=1).transpose(1, 2))
        # Keep the position code small relative to the projected inertia so a
        # weak single-channel gyro signature is not drowned at initialization.
        x = x + POSITION_SCALE * _sinusoidal_positions(
            steps, MOTION_HIDDEN_WIDTH).to(x.dtype)
        hidden = self.encoder(x)                   # [B, T, 384]
        scores = self.score(hidden)                # [B, T, 8]
        pooled = nn.functional.avg_pool1d(
            scores.transpose(1, 2), TIME_DOWNSAMPLE, TIME_DOWNSAMPLE).transpose(1, 2)
        return hidden.transpose(1, 2), pooled

    def save(self, path) -> None:
        save_checkpoint(path, kind=self.KIND,
                        config={"n_heads": self.n_heads,
                                "feedforward": self.feedforward,
                                "classes": list(class_names())},
                        state_dict=self.state_dict())

    @classmethod
    def load(cls, path) -> "MotionBranch":
        payload = load_checkpoint(path, expected_kind=cls.KIND)
        _check_class_order(payload["config"])
        model = cls(n_heads=payload["config"]["n_heads"],
                    feedforward=payload["config"]["feedforward"])
        model.load_state_dict(payload["state"])
        model.eval()
        return model


class CompensatedLocalizer(nn.Module):
    """Audio localizer fused with the motion branch before attention.

    Motion hidden states are average-pooled onto the audio frame grid and
    concatenated with the GRU output, projected back to the trunk width, and
    passed through the shared attention + linear head.
    """

    KIND = "compensated_localizer"

    def __init__(self, width: int = 128, multi_source: bool = False,
                 n_heads: int = 6, feedforward: int = 256):
        super().__init__()
        self.width = width
        self.multi_source = multi_source
        self.trunk = _AudioTrunk(width)
        self.motion = MotionBranch(n_heads=n_heads, feedforward=feedforward)
        self.fusion = nn.Linear(width + MOTION_HIDDEN_WIDTH, width)
        self.attn_head = _AttentiveHead(width)
        # Start as the audio-only architecture: the fusion passes the GRU
        # output through unchanged while the motion columns begin near zero,
        # so the inertial pathway only grows where it actually reduces loss.
        with torch.no_grad():
            self.fusion.weight[:, :width] = torch.eye(width)
            self.fusion.weight[:, width:] *= 0.1
            self.fusion.bias.zero_()

    def forward(self, feats: torch.Tensor, imu: torch.Tensor,
                use_motion: bool = True) -> torch.Tensor:
        """Logits [B, T/5, 8] from features [B, 3, T, 64] and inertia [B, 6, T'].

        `use_motion=False` silences the inertial pathway (zeros in place of
        pooled motion features); the staged training loop uses it to settle
        the audio path before the compensation pathway starts learning.
        """
        audio_out = self.trunk(feats)              # [B, T/5, width]
        t5 = audio_out.shape[1]
        if use_motion:
            hidden, _ = self.motion(imu)           # [B, 384, T']
            pooled = nn.functional.adaptive_avg_pool1d(hidden, t5).transpose(1, 2)
        else:
            pooled = audio_out.new_zeros(
                audio_out.shape[0], t5, MOTION_HIDDEN_WIDTH)
        fused = self.fusion(torch.cat([audio_out, pooled], dim=-1))
        return self.attn_head(fused)

    def save(self, path) -> None:
        save_checkpoint(path, kind=self.KIND,
                        config={"width": self.width,
                                "multi_source": self.multi_source,
                                "n_heads": self.motion.n_heads,
                                "feedforward": self.motion.feedforward,
                                "classes": list(class_names())},
                        state_dict=self.state_dict())

    @classmethod
    def load(cls, path) -> "CompensatedLocalizer":
        payload = load_checkpoint(path, expected_kind=cls.KIND)
        _check_class_order(payload["config"])
        model = cls(width=payload["config"]["width"],
                    multi_source=payload["config"]["multi_source"],
                    n_heads=payload["config"]["n_heads"],
                    feedforward=payload["config"]["feedforward"])
        model.load_state_dict(payload["state"])
        model.eval()
        return model


def _check_class_order(config: dict) -> None:
    from ..checkpoint import CheckpointError
    stored = tuple(config.get("classes", ()))
    if stored != class_names():
        raise CheckpointError(
            f"checkpoint class order {stored} does not match {class_names()}")


def _probs_from_logits(logits: torch.Tensor, multi_source: bool) -> np.ndarray:
    if multi_source:
        return torch.sigmoid(logits).double().numpy()
    return torch.softmax(logits, dim=-1).double().numpy()


def localize_audio_only(model: AudioLocalizer, features) -> SpatialPrediction:
    """Run the audio-only localizer on one feature stack [3, T, 64]."""
    x = prep_features(features)[None]
    model.eval()
    with torch.no_grad():
        logits = model(x)[0]
    return SpatialPrediction(_probs_from_logits(logits, model.multi_source),
                             multi_source=model.multi_source)


def motion_branch(model: MotionBranch, imu) -> tuple[MotionFeatures, np.ndarray]:
    """Run the inertial branch on one window; returns (hidden, frame scores)."""
    x = prep_imu(imu)[None]
    model.eval()
    with torch.no_grad():
        hidden, scores = model(x)
    return MotionFeatures(hidden[0].double().numpy()), scores[0].double().numpy()


def localize_compensated(model: CompensatedLocalizer, features,
                         imu) -> SpatialPrediction:
    """Run the motion-compensated localizer on one time-aligned window."""
    x = prep_features(features)[None]
    if isinstance(features, SpatialFeatures) and isinstance(imu, ImuSequence):
        feat_duration = features.n_frames * features.frame_hop
        if abs(feat_duration - imu.duration) > features.frame_hop + 1e-9:
            raise ValueError(
                "audio features and inertial window are misaligned beyond one "
                f"frame: {feat_duration:.3f}s vs {imu.duration:.3f}s")
    m = prep_imu(imu)[None]
    model.eval()
    with torch.no_grad():
        logits = model(x, m)[0]
    return SpatialPrediction(_probs_from_logits(logits, model.multi_source),
                             multi_source=model.multi_source)
