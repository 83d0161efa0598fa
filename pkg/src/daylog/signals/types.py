"""Core sensor data containers shared across the pipeline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

WINDOW_DURATIONS = (1.0, 2.0, 5.0, 30.0)


class DegenerateSceneError(ValueError):
    """Raised when a scene or label request has no meaningful answer."""


@dataclass
class AudioClip:
    """Multi-channel audio held as float samples in [-1, 1].

    samples has shape [channels, frames]; channels must be 2 or 4.
    """

    samples: np.ndarray
    sample_rate: float = 48000.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2:
            raise ValueError("samples must be [channels, frames]")
        if self.samples.shape[0] not in (2, 4):
            raise ValueError(f"channels must be 2 or 4, got {self.samples.shape[0]}")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")
        if self.samples.size and np.max(np.abs(self.samples)) > 1.0 + 1e-9:
            raise ValueError("samples must lie in [-1, 1]")

    @property
    def channels(self) -> int:
        return self.samples.shape[0]

    @property
    def frames(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.frames / self.sample_rate

    def stereo_pair(self, pair: tuple[int, int] = (0, 1)) -> "AudioClip":
        """Reduce to the configured reference stereo pair."""
        if self.channels == 2 and pair == (0, 1):
            return self
        return AudioClip(self.samples[list(pair)], self.sample_rate)


@dataclass
class ImuSequence:
    """6-axis inertial sequence: ax, ay, az in m/s^2 and gx, gy, gz in rad/s."""

    samples: np.ndarray
    sample_rate: float = 200.0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2 or self.samples.shape[0] != 6:
            raise ValueError("samples must be [6, frames]")
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be positive")

    @property
    def frames(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.frames / self.sample_rate


@dataclass
class SensorWindow:
    """Time-aligned audio + IMU slice covering one task window."""

    audio: AudioClip
    imu: ImuSequence
    start_time: float = 0.0
    duration: float | None = None

    def __post_init__(self):
        if self.duration is None:
            self.duration = self.audio.duration
        slower_period = 1.0 / min(self.audio.sample_rate, self.imu.sample_rate)
        if abs(self.audio.duration - self.imu.duration) >= slower_period:
            raise ValueError(
                "audio and IMU durations disagree beyond one frame of the slower "
                f"stream: {self.audio.duration:.4f}s vs {self.imu.duration:.4f}s"
            )
        if not any(abs(self.duration - d) < slower_period for d in WINDOW_DURATIONS):
            raise ValueError(
                f"window duration must be one of {WINDOW_DURATIONS} seconds, "
                f"got {self.duration}"
            )


@dataclass
class SpatialFeatures:
    """Stacked localization input: [3, T, 64] = left log-Mel, right log-Mel, GCC."""

    tensor: np.ndarray
    frame_hop: float

    def __post_init__(self):
        self.tensor = np.asarray(self.tensor, dtype=np.float64)
        if self.tensor.ndim != 3 or self.tensor.shape[0] != 3 or self.tensor.shape[2] != 64:
            raise ValueError(f"expected [3, T, 64], got {self.tensor.shape}")
        if not np.all(np.isfinite(self.tensor)):
            raise ValueError("spatial features must be finite")

    @property
    def n_frames(self) -> int:
        return self.tensor.shape[1]
